//! Dense real linear-algebra kernel.
//!
//! Storage is `nalgebra::DMatrix<f64>`; the Schur machinery and the
//! Lyapunov solver are implemented here so that eigenvalue ordering and
//! block structure are under our control.

mod lyapunov;
mod schur;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub use lyapunov::solve_hurwitz_lyapunov;
pub(crate) use schur::is_stable_side;
pub use schur::{ordered_real_schur, ordered_real_schur_with, real_schur, SchurForm};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexVector = DVector<Complex<f64>>;

pub(crate) fn ensure_square(m: &RealMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_finite(m: &RealMatrix, name: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

/// Sort by real part, then imaginary part, ascending.
pub fn sort_eigenvalues(eigs: &mut [Complex<f64>]) {
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All eigenvalues of a square matrix, sorted by `(Re, Im)` ascending.
/// Complex eigenvalues come in exact conjugate pairs.
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<Complex<f64>>> {
    let (_, t) = real_schur(m)?;
    let mut eigs = schur::block_eigenvalues(&t);
    sort_eigenvalues(&mut eigs);
    Ok(eigs)
}

/// Largest real part over the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa(m: &RealMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Unit left eigenvector `y` with `yᵀM = λyᵀ`, computed as the right
/// null vector of `Mᵀ − λI`.
///
/// The phase is fixed so that the first component that is not negligible
/// is real and positive; for a real eigenvalue the result is real.
pub fn left_eigenvector(m: &RealMatrix, lambda: Complex<f64>) -> Result<ComplexVector> {
    left_eigenvector_with(m, lambda, crate::Tolerances::default().eig)
}

pub fn left_eigenvector_with(m: &RealMatrix, lambda: Complex<f64>, tol_eig: f64) -> Result<ComplexVector> {
    let n = ensure_square(m)?;
    ensure_finite(m, "M")?;
    if n == 0 {
        return Err(Error::NotAnEigenvalue {
            re: lambda.re,
            im: lambda.im,
            residual: f64::INFINITY,
        });
    }
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let v = Complex::new(m[(j, i)], 0.0);
        if i == j {
            v - lambda
        } else {
            v
        }
    });
    let svd = shifted.svd(false, true);
    let (imin, &smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let scale = m.norm() + lambda.norm();
    if smin > tol_eig * scale {
        return Err(Error::NotAnEigenvalue {
            re: lambda.re,
            im: lambda.im,
            residual: smin,
        });
    }
    let v_t = svd.v_t.expect("requested");
    let mut y: ComplexVector = v_t.row(imin).transpose().map(|z| z.conj());
    let norm = y.norm();
    y /= Complex::new(norm, 0.0);
    normalize_phase(&mut y);
    Ok(y)
}

fn normalize_phase(y: &mut ComplexVector) {
    let cutoff = f64::EPSILON.sqrt() * y.camax();
    if let Some(lead) = y.iter().find(|z| z.norm() > cutoff).copied() {
        let phase = lead.conj() / lead.norm();
        *y *= phase;
    }
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub(crate) fn symmetric_eigenvalues(m: &RealMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub(crate) fn min_symmetric_eigenvalue(m: &RealMatrix) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}
