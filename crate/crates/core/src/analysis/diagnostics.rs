use nalgebra::{Complex, DVector};
use serde::Serialize;

use crate::decomposition::{a_r_with, w_vector, z_matrix_with};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, is_stable_side, left_eigenvector_with};
use crate::plant::Plant;
use crate::Tolerances;

type C64 = Complex<f64>;

/// Quadratic-form diagnostics at the rightmost anti-stable eigenvalue `λ`
/// of `A_r`, with `y` its left eigenvector.
///
/// `yᵀZy` vanishes exactly when `w y = 0` or `B2ᵀ y = 0`, and its sign
/// decides whether the slack `X` can be positive along `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    #[serde(skip)]
    pub eigenvalue: C64,
    #[serde(skip)]
    pub left_eigenvector: Vec<C64>,
    #[serde(skip)]
    pub w_dot_y: C64,
    #[serde(skip)]
    pub b2_dot_y: C64,
    /// `yᵀ Z y` (plain transpose, no conjugation).
    #[serde(skip)]
    pub quadratic_form: C64,
    /// `−2 (w y)(B2ᵀ y)`.
    #[serde(skip)]
    pub factored_form: C64,
    pub identity_residual: f64,
    /// `yᵀZy` is zero to working precision.
    pub degenerate: bool,
}

pub fn degeneracy_diagnostics(plant: &Plant, epsilon: f64) -> Result<DegeneracyReport> {
    degeneracy_diagnostics_with(plant, epsilon, &Tolerances::default())
}

pub fn degeneracy_diagnostics_with(plant: &Plant, epsilon: f64, tol: &Tolerances) -> Result<DegeneracyReport> {
    let ar = a_r_with(plant, epsilon, tol)?;
    let band = tol.split * ar.norm();
    let mut rightmost: Option<C64> = None;
    for l in eigenvalues(&ar)? {
        if !is_stable_side(l, 0.0, band)? && rightmost.is_none_or(|r| l.re > r.re || (l.re == r.re && l.im > r.im)) {
            rightmost = Some(l);
        }
    }
    let lambda = rightmost.ok_or(Error::NoAntistableEigenvalue)?;
    let y = left_eigenvector_with(&ar, lambda, tol.eig)?;

    let to_c = |v: f64| C64::new(v, 0.0);
    let z = z_matrix_with(plant, tol)?.map(to_c);
    let w = w_vector(plant)?.map(to_c);
    let b2 = plant.b2().map(to_c);
    let quadratic_form = (y.transpose() * &z * &y)[(0, 0)];
    let w_dot_y = (&w * &y)[(0, 0)];
    let b2_dot_y = (b2.transpose() * &y)[(0, 0)];
    let factored_form = -2.0 * w_dot_y * b2_dot_y;
    let scale = z.norm() + 2.0 * w.norm() * b2.norm();

    Ok(DegeneracyReport {
        eigenvalue: lambda,
        left_eigenvector: DVector::iter(&y).copied().collect(),
        w_dot_y,
        b2_dot_y,
        quadratic_form,
        factored_form,
        identity_residual: (quadratic_form - factored_form).norm(),
        degenerate: quadratic_form.norm() <= tol.eig * scale,
    })
}
