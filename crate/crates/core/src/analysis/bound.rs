use nalgebra::Complex;
use serde::Serialize;

use crate::decomposition::a_r_with;
use crate::error::Result;
use crate::matrix::eigenvalues;
use crate::plant::Plant;
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// One zero in the open right half-plane.
    OneUnstable,
    /// Minimum phase.
    NoUnstable,
    /// Repeated zeros, several unstable zeros, zeros on the imaginary axis,
    /// or no stable zero at all.
    OutOfScope,
}

/// Spectrum of `A_q` classified by the sign of the real part, and the
/// largest degree of stability the synthesis can guarantee.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityBoundReport {
    /// Ascending by `(Re, Im)`.
    #[serde(skip)]
    pub eigs_aq: Vec<Complex<f64>>,
    pub n_unstable: usize,
    pub n_zero: usize,
    pub n_stable: usize,
    /// Minus the real part of the rightmost stable eigenvalue of `A_q`.
    pub gamma: Option<f64>,
    pub case: BoundCase,
    pub distinct: bool,
}

/// Classify `σ(A_q)` and compute the bound `γ`.
///
/// `A_q` always has an eigenvalue at the origin. Beyond it, if exactly one
/// eigenvalue is unstable or none is, and all are distinct, then `γ` is
/// the distance from the imaginary axis to the nearest stable eigenvalue:
/// shifting by `ε ≥ γ` pushes that eigenvalue across the axis.
///
/// ```
/// use ni_stab::{analysis::{stability_bound, BoundCase}, plant::Plant};
///
/// let plant = Plant::from_slices(
///     &[-1.0, 0.0, -1.0, 1.0, 0.0, -1.0, -1.0, 2.0, 1.0],
///     &[1.0, 1.0, 1.0],
///     &[0.0, 1.0, 1.0],
///     &[1.0, 1.0, 0.0],
/// ).unwrap();
/// let report = stability_bound(&plant).unwrap();
/// assert_eq!(report.case, BoundCase::OneUnstable);
/// assert!((report.gamma.unwrap() - (7f64.sqrt() - 1.0)).abs() < 1e-12);
/// ```
pub fn stability_bound(plant: &Plant) -> Result<StabilityBoundReport> {
    stability_bound_with(plant, &Tolerances::default())
}

pub fn stability_bound_with(plant: &Plant, tol: &Tolerances) -> Result<StabilityBoundReport> {
    let aq = a_r_with(plant, 0.0, tol)?;
    let eigs = eigenvalues(&aq)?;
    let scale = aq.norm();
    let band = tol.split * scale;

    let n_unstable = eigs.iter().filter(|l| l.re > band).count();
    let n_zero = eigs.iter().filter(|l| l.re.abs() <= band).count();
    let n_stable = eigs.len() - n_unstable - n_zero;
    let gap = tol.distinct * scale;
    let distinct = eigs
        .iter()
        .enumerate()
        .all(|(i, a)| eigs[i + 1..].iter().all(|b| (a - b).norm() > gap));

    let in_scope = n_zero == 1 && n_stable >= 1 && distinct;
    let case = match n_unstable {
        1 if in_scope => BoundCase::OneUnstable,
        0 if in_scope => BoundCase::NoUnstable,
        _ => BoundCase::OutOfScope,
    };
    let gamma = (case != BoundCase::OutOfScope).then(|| {
        -eigs
            .iter()
            .filter(|l| l.re < -band)
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(StabilityBoundReport {
        eigs_aq: eigs,
        n_unstable,
        n_zero,
        n_stable,
        gamma,
        case,
        distinct,
    })
}
