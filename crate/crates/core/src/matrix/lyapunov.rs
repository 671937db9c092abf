//! Continuous Lyapunov equations `F X + X Fᵀ + W = 0` with Hurwitz `F`,
//! solved by the Bartels–Stewart scheme on the real Schur form of `F`.

use nalgebra::{DMatrix, DVector};

use super::schur::{block_eigenvalues, real_schur};
use super::{ensure_finite, ensure_square, RealMatrix};
use crate::error::{Error, Result};

/// Unique symmetric solution of `F X + X Fᵀ + W = 0`.
///
/// `F` must have every eigenvalue in the open left half-plane and `W` must
/// be symmetric and of the same size.
pub fn solve_hurwitz_lyapunov(f: &RealMatrix, w: &RealMatrix) -> Result<RealMatrix> {
    let n = ensure_square(f)?;
    if w.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "F is {n}x{n} but W is {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    ensure_finite(f, "F")?;
    ensure_finite(w, "W")?;
    let asymmetry = (w - w.transpose()).norm();
    if asymmetry > 1e-10 * w.norm() {
        return Err(Error::NotSymmetric { asymmetry });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let (u, t) = real_schur(f)?;
    let max_real = block_eigenvalues(&t)
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_real >= 0.0 {
        return Err(Error::NotHurwitz { max_real });
    }

    let c = -(u.transpose() * w * &u);
    let y = solve_quasi_triangular(&t, &c).ok_or(Error::NotHurwitz { max_real })?;
    let x = &u * y * u.transpose();
    Ok((&x + x.transpose()) * 0.5)
}

/// Solve `T Y + Y Tᵀ = C` for quasi-upper-triangular `T`, block by block,
/// from the bottom-right corner.
fn solve_quasi_triangular(t: &RealMatrix, c: &RealMatrix) -> Option<RealMatrix> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < n {
        let size = if k + 1 < n && t[(k + 1, k)] != 0.0 { 2 } else { 1 };
        blocks.push((k, size));
        k += size;
    }

    let mut y = DMatrix::<f64>::zeros(n, n);
    for &(j0, q) in blocks.iter().rev() {
        for &(i0, p) in blocks.iter().rev() {
            // C_IJ − Σ_{K>I} T_IK Y_KJ − Σ_{L>J} Y_IL T_JLᵀ
            let mut rhs = c.view((i0, j0), (p, q)).clone_owned();
            let tail_i = i0 + p;
            if tail_i < n {
                rhs -= t.view((i0, tail_i), (p, n - tail_i)) * y.view((tail_i, j0), (n - tail_i, q));
            }
            let tail_j = j0 + q;
            if tail_j < n {
                rhs -= y.view((i0, tail_j), (p, n - tail_j))
                    * t.view((j0, tail_j), (q, n - tail_j)).transpose();
            }
            let block = solve_small_sylvester(
                &t.view((i0, i0), (p, p)).clone_owned(),
                &t.view((j0, j0), (q, q)).clone_owned(),
                &rhs,
            )?;
            y.view_mut((i0, j0), (p, q)).copy_from(&block);
        }
    }
    Some(y)
}

/// `A Y + Y Bᵀ = R` for blocks of size at most 2, via the column-major
/// Kronecker form `(I ⊗ A + B ⊗ I) vec(Y) = vec(R)`.
fn solve_small_sylvester(a: &RealMatrix, b: &RealMatrix, r: &RealMatrix) -> Option<RealMatrix> {
    let p = a.nrows();
    let q = b.nrows();
    let mut kron = DMatrix::<f64>::zeros(p * q, p * q);
    for col in 0..q {
        for row in 0..p {
            let eq = row + col * p;
            for k in 0..p {
                kron[(eq, k + col * p)] += a[(row, k)];
            }
            for l in 0..q {
                kron[(eq, row + l * p)] += b[(col, l)];
            }
        }
    }
    let rhs = DVector::from_iterator(p * q, r.iter().copied());
    let sol = kron.lu().solve(&rhs)?;
    Some(DMatrix::from_column_slice(p, q, sol.as_slice()))
}
