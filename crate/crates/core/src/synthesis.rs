//! State-feedback synthesis for a prescribed degree of stability ε.
//!
//! If `A_r` has anti-stable eigenvalues the gain comes from two Lyapunov
//! equations on the anti-stable block and a certificate `P`; otherwise the
//! minimum-phase gain `K = −(C1A + εC1)/(C1B2)` applies with `P = 0`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::decomposition::{schur_partition_with, SchurPartition};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, is_stable_side, solve_hurwitz_lyapunov, symmetric_eigenvalues, RealMatrix};
use crate::plant::Plant;
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Anti-stable block present; Lyapunov-based gain.
    Lyapunov,
    /// No anti-stable block; closed-form gain with `P = 0`.
    MinimumPhase,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Lyapunov => "lyapunov",
            Branch::MinimumPhase => "minimum_phase",
        }
    }
}

/// Result of a synthesis attempt. Infeasibility is a verdict, not an
/// error: `gain` is `None` and the diagnostics explain why.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome {
    pub epsilon: f64,
    pub branch: Branch,
    pub feasible: bool,
    /// `K`, `1×n`.
    pub gain: Option<RealMatrix>,
    /// `P`, `n×n` symmetric positive semidefinite.
    pub certificate: Option<RealMatrix>,
    pub t: Option<RealMatrix>,
    pub s: Option<RealMatrix>,
    /// `X = T − S`.
    pub x: Option<RealMatrix>,
    /// Ascending.
    pub x_eigenvalues: Vec<f64>,
    pub x_min_eig: Option<f64>,
    pub t_min_eig: Option<f64>,
    pub s_min_eig: Option<f64>,
    pub dim_antistable: usize,
}

/// Lyapunov-branch gain from precomputed `T` and `S`.
///
/// Feasible iff `T ⪰ 0`, `S ⪰ 0` and `X = T − S ≻ 0`. The definiteness
/// margin for `X` is relative to `‖T‖ + ‖S‖`, so an `X` that is a tiny
/// difference of large terms is not mistaken for a positive one.
pub fn lyapunov_gain(
    plant: &Plant,
    epsilon: f64,
    partition: &SchurPartition,
    t: &RealMatrix,
    s: &RealMatrix,
    tol: &Tolerances,
) -> Result<SynthesisOutcome> {
    let m = partition.dim_antistable;
    if m == 0 {
        return Err(Error::DimensionMismatch("partition has no anti-stable block".into()));
    }
    if partition.n() != plant.n() {
        return Err(Error::DimensionMismatch(format!(
            "partition is for n = {}, plant has n = {}",
            partition.n(),
            plant.n()
        )));
    }
    for (mat, name) in [(t, "T"), (s, "S")] {
        if mat.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, anti-stable block is {m}x{m}",
                mat.nrows(),
                mat.ncols()
            )));
        }
    }

    let t_eigs = symmetric_eigenvalues(t);
    let s_eigs = symmetric_eigenvalues(s);
    let x = t - s;
    let x = (&x + x.transpose()) * 0.5;
    let x_eigs = symmetric_eigenvalues(&x);
    let (t_min, s_min, x_min) = (t_eigs[0], s_eigs[0], x_eigs[0]);

    let t_ok = t_min >= -tol.psd * t.norm();
    let s_ok = s_min >= -tol.psd * s.norm();
    let x_ok = x_min > tol.pd * (t.norm() + s.norm());
    let feasible = t_ok && s_ok && x_ok;

    let mut outcome = SynthesisOutcome {
        epsilon,
        branch: Branch::Lyapunov,
        feasible,
        gain: None,
        certificate: None,
        t: Some(t.clone()),
        s: Some(s.clone()),
        x: Some(x.clone()),
        x_eigenvalues: x_eigs,
        x_min_eig: Some(x_min),
        t_min_eig: Some(t_min),
        s_min_eig: Some(s_min),
        dim_antistable: m,
    };
    if !feasible {
        return Ok(outcome);
    }

    let x_inv = symmetric_inverse(&x)?;
    let u2 = partition.u_antistable();
    let p = &u2 * x_inv * u2.transpose();
    let p = (&p + p.transpose()) * 0.5;

    let (c, r) = (partition.c1b2, partition.r);
    let b1p = plant.b1().transpose() * &p;
    let b2p = plant.b2().transpose() * &p;
    let c1a = plant.c1() * plant.a();
    let k = (b1p - c1a - plant.c1() * epsilon - b2p * (r / c)) / c;

    outcome.gain = Some(k);
    outcome.certificate = Some(p);
    Ok(outcome)
}

/// Inverse through the symmetric eigendecomposition, so that a nearly
/// singular `X` is reported by its eigenvalue rather than by a pivot.
fn symmetric_inverse(x: &RealMatrix) -> Result<RealMatrix> {
    let eig = x.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.min();
    let inv_diag = eig.eigenvalues.map(|l| 1.0 / l);
    if min_eig <= 0.0 || inv_diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::InversionFailure { min_eig });
    }
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv_diag) * v.transpose())
}

/// Minimum-phase gain `K = −(C1A + εC1)/(C1B2)`, with `P = 0`.
///
/// Requires `A_r` to have no eigenvalue in the open right half-plane.
pub fn minimum_phase_gain(plant: &Plant, epsilon: f64) -> Result<SynthesisOutcome> {
    minimum_phase_gain_with(plant, epsilon, &Tolerances::default())
}

pub fn minimum_phase_gain_with(plant: &Plant, epsilon: f64, tol: &Tolerances) -> Result<SynthesisOutcome> {
    check_epsilon(epsilon)?;
    let ar = crate::decomposition::a_r_with(plant, epsilon, tol)?;
    let band = tol.split * ar.norm();
    let mut dim = 0;
    for lambda in eigenvalues(&ar)? {
        if !is_stable_side(lambda, 0.0, band)? {
            dim += 1;
        }
    }
    if dim > 0 {
        return Err(Error::AntistableBlockPresent { dim });
    }
    Ok(minimum_phase_outcome(plant, epsilon, plant.control_gain(tol)?))
}

fn minimum_phase_outcome(plant: &Plant, epsilon: f64, c: f64) -> SynthesisOutcome {
    let n = plant.n();
    let k = -(plant.c1() * plant.a() + plant.c1() * epsilon) / c;
    SynthesisOutcome {
        epsilon,
        branch: Branch::MinimumPhase,
        feasible: true,
        gain: Some(k),
        certificate: Some(DMatrix::zeros(n, n)),
        t: None,
        s: None,
        x: None,
        x_eigenvalues: Vec::new(),
        x_min_eig: None,
        t_min_eig: None,
        s_min_eig: None,
        dim_antistable: 0,
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

/// The two Lyapunov solutions `(T, S)` on the anti-stable block:
///
/// ```text
/// −A22 T − T A22ᵀ + C22 R C22ᵀ = 0
/// −A22 S − S A22ᵀ + B22 B22ᵀ / R = 0
/// ```
pub fn antistable_lyapunov_pair(partition: &SchurPartition) -> Result<(RealMatrix, RealMatrix)> {
    let f = -&partition.a22;
    let r = partition.r;
    let w_t = &partition.c22 * partition.c22.transpose() * r;
    let w_s = &partition.b22 * partition.b22.transpose() / r;
    Ok((solve_hurwitz_lyapunov(&f, &w_t)?, solve_hurwitz_lyapunov(&f, &w_s)?))
}

/// Pick the branch from the Schur partition of `A_r` and synthesize.
pub fn synthesize(plant: &Plant, epsilon: f64) -> Result<SynthesisOutcome> {
    synthesize_with(plant, epsilon, &Tolerances::default())
}

pub fn synthesize_with(plant: &Plant, epsilon: f64, tol: &Tolerances) -> Result<SynthesisOutcome> {
    check_epsilon(epsilon)?;
    let partition = schur_partition_with(plant, epsilon, tol)?;
    if partition.is_minimum_phase() {
        return Ok(minimum_phase_outcome(plant, epsilon, partition.c1b2));
    }
    let (t, s) = antistable_lyapunov_pair(&partition)?;
    lyapunov_gain(plant, epsilon, &partition, &t, &s, tol)
}
