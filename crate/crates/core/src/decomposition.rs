//! Structural matrices of a plant: the projector along the control channel,
//! the zero-dynamics matrix, its ε-perturbation, and the Schur partition of
//! that perturbation into stable and anti-stable parts.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{ordered_real_schur_with, RealMatrix};
use crate::plant::Plant;
use crate::Tolerances;

/// `Q = I − B2 (C1 B2)⁻¹ C1`, the oblique projector that annihilates `B2`
/// on the right and `C1` on the left.
pub fn projector_q(plant: &Plant) -> Result<RealMatrix> {
    projector_with(plant, &Tolerances::default())
}

fn projector_with(plant: &Plant, tol: &Tolerances) -> Result<RealMatrix> {
    let c = plant.control_gain(tol)?;
    let n = plant.n();
    Ok(DMatrix::identity(n, n) - plant.b2() * plant.c1() / c)
}

/// `Q A`. Its spectrum is the zeros of the `u → z` transfer function
/// together with one eigenvalue at the origin.
pub fn a_q(plant: &Plant) -> Result<RealMatrix> {
    Ok(projector_q(plant)? * plant.a())
}

/// `Q (A + εI) = A_q + ε Q`.
pub fn a_r(plant: &Plant, epsilon: f64) -> Result<RealMatrix> {
    a_r_with(plant, epsilon, &Tolerances::default())
}

pub(crate) fn a_r_with(plant: &Plant, epsilon: f64, tol: &Tolerances) -> Result<RealMatrix> {
    let q = projector_with(plant, tol)?;
    Ok(&q * plant.a() + q * epsilon)
}

/// The symmetric matrix
/// `(B1 B2ᵀ + B2 B1ᵀ) / c − R B2 B2ᵀ / c²` with `c = C1 B2`.
///
/// For any `y`, `yᵀ Z y = −2 (w y)(B2ᵀ y)` where `w` is [`w_vector`].
pub fn z_matrix(plant: &Plant) -> Result<RealMatrix> {
    z_matrix_with(plant, &Tolerances::default())
}

pub(crate) fn z_matrix_with(plant: &Plant, tol: &Tolerances) -> Result<RealMatrix> {
    let c = plant.control_gain(tol)?;
    let r = plant.disturbance_gain(tol)?;
    let (b1, b2) = (plant.b1(), plant.b2());
    let cross = b1 * b2.transpose();
    let z = (&cross + cross.transpose()) / c - b2 * b2.transpose() * (r / (c * c));
    Ok((&z + z.transpose()) * 0.5)
}

/// Row vector `(C1B1 · B2ᵀ − C1B2 · B1ᵀ) / (C1B2)²`, orthogonal to `C1`.
pub fn w_vector(plant: &Plant) -> Result<RealMatrix> {
    let c = plant.control_gain(&Tolerances::default())?;
    let c1b1 = (plant.c1() * plant.b1())[(0, 0)];
    Ok((plant.b2().transpose() * c1b1 - plant.b1().transpose() * c) / (c * c))
}

/// `A_r` in ordered real Schur coordinates, split into the closed-left
/// (leading) and open-right (trailing) half-plane parts.
///
/// With `U` the orthogonal Schur basis, the blocks are those of
/// `Uᵀ A_r U`, `Uᵀ B1`, `Uᵀ (B2/c − B1/R)` and `Uᵀ Z U`. When `A_r` has no
/// anti-stable eigenvalue every trailing block is `0×0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurPartition {
    pub u: RealMatrix,
    pub a11: RealMatrix,
    pub a12: RealMatrix,
    pub a22: RealMatrix,
    pub b11: RealMatrix,
    pub b22: RealMatrix,
    pub c11: RealMatrix,
    pub c22: RealMatrix,
    pub z11: RealMatrix,
    pub z12: RealMatrix,
    pub z21: RealMatrix,
    pub z22: RealMatrix,
    pub dim_antistable: usize,
    pub epsilon: f64,
    /// `C1 B2`.
    pub c1b2: f64,
    /// `R = 2 C1 B1`.
    pub r: f64,
}

impl SchurPartition {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim_stable(&self) -> usize {
        self.n() - self.dim_antistable
    }

    pub fn is_minimum_phase(&self) -> bool {
        self.dim_antistable == 0
    }

    /// Trailing Schur vectors, spanning the anti-stable invariant subspace.
    pub fn u_antistable(&self) -> RealMatrix {
        self.u.columns(self.dim_stable(), self.dim_antistable).into_owned()
    }

    /// Reassembled quasi-triangular factor `[[A11, A12], [0, A22]]`.
    pub fn t(&self) -> RealMatrix {
        let (n, k) = (self.n(), self.dim_stable());
        let mut t = DMatrix::zeros(n, n);
        t.view_mut((0, 0), (k, k)).copy_from(&self.a11);
        t.view_mut((0, k), (k, n - k)).copy_from(&self.a12);
        t.view_mut((k, k), (n - k, n - k)).copy_from(&self.a22);
        t
    }

    /// Reassembled `Uᵀ Z U`.
    pub fn z_tilde(&self) -> RealMatrix {
        let (n, k) = (self.n(), self.dim_stable());
        let mut z = DMatrix::zeros(n, n);
        z.view_mut((0, 0), (k, k)).copy_from(&self.z11);
        z.view_mut((0, k), (k, n - k)).copy_from(&self.z12);
        z.view_mut((k, 0), (n - k, k)).copy_from(&self.z21);
        z.view_mut((k, k), (n - k, n - k)).copy_from(&self.z22);
        z
    }
}

pub fn schur_partition(plant: &Plant, epsilon: f64) -> Result<SchurPartition> {
    schur_partition_with(plant, epsilon, &Tolerances::default())
}

pub fn schur_partition_with(plant: &Plant, epsilon: f64, tol: &Tolerances) -> Result<SchurPartition> {
    if !epsilon.is_finite() {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let c = plant.control_gain(tol)?;
    let r = plant.disturbance_gain(tol)?;
    let ar = a_r_with(plant, epsilon, tol)?;
    let schur = ordered_real_schur_with(&ar, 0.0, tol.split)?;
    let (n, k) = (plant.n(), schur.k_stable);
    let m = n - k;
    let u = schur.u;

    let b_t = u.transpose() * plant.b1();
    let c_t = u.transpose() * (plant.b2() / c - plant.b1() / r);
    let z_t = u.transpose() * z_matrix_with(plant, tol)? * &u;
    let z_t = (&z_t + z_t.transpose()) * 0.5;
    let t = &schur.t;

    Ok(SchurPartition {
        a11: t.view((0, 0), (k, k)).into_owned(),
        a12: t.view((0, k), (k, m)).into_owned(),
        a22: t.view((k, k), (m, m)).into_owned(),
        b11: b_t.rows(0, k).into_owned(),
        b22: b_t.rows(k, m).into_owned(),
        c11: c_t.rows(0, k).into_owned(),
        c22: c_t.rows(k, m).into_owned(),
        z11: z_t.view((0, 0), (k, k)).into_owned(),
        z12: z_t.view((0, k), (k, m)).into_owned(),
        z21: z_t.view((k, 0), (m, k)).into_owned(),
        z22: z_t.view((k, k), (m, m)).into_owned(),
        u,
        dim_antistable: m,
        epsilon,
        c1b2: c,
        r,
    })
}
