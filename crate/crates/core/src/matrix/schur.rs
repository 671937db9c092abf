//! Real Schur decomposition and eigenvalue reordering.
//!
//! The unordered form comes from a Hessenberg reduction followed by the
//! implicit double-shift (Francis) QR iteration, with the deflation test and
//! exceptional shifts of LAPACK's `dlahqr`. 2x2 diagonal blocks are kept in
//! standard form (equal diagonal, off-diagonals of opposite sign), so a block
//! is 2x2 exactly when its subdiagonal entry is nonzero.
//!
//! Reordering moves one diagonal block at a time across its neighbour with an
//! orthogonal similarity, which keeps `U` orthogonal to working precision.

use nalgebra::{Complex, DMatrix};

use super::{ensure_finite, ensure_square, RealMatrix};
use crate::error::{Error, Result};

const EXCEPTIONAL_EVERY: usize = 10;
const EXCEPTIONAL_DAT1: f64 = 0.75;
const EXCEPTIONAL_DAT2: f64 = -0.4375;

/// An ordered real Schur factorization `M = U T Uᵀ`.
///
/// The leading `k_stable` diagonal entries of `t` hold every eigenvalue on
/// the stable side of the split; the trailing block holds the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurForm {
    pub u: RealMatrix,
    pub t: RealMatrix,
    pub k_stable: usize,
}

impl SchurForm {
    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues read off the diagonal blocks of `t`, in diagonal order.
    pub fn diagonal_eigenvalues(&self) -> Vec<Complex<f64>> {
        block_eigenvalues(&self.t)
    }
}

/// Unordered real Schur decomposition, returned as `(U, T)` with
/// `M = U T Uᵀ`.
pub fn real_schur(m: &RealMatrix) -> Result<(RealMatrix, RealMatrix)> {
    let n = ensure_square(m)?;
    ensure_finite(m, "M")?;
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((DMatrix::identity(1, 1), m.clone()));
    }
    let (mut u, mut t) = m.clone().hessenberg().unpack();
    francis_qr(&mut t, &mut u)?;
    Ok((u, t))
}

/// Eigenvalues of the diagonal blocks of a standardized quasi-triangular
/// matrix, in diagonal order.
pub(crate) fn block_eigenvalues(t: &RealMatrix) -> Vec<Complex<f64>> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)] != 0.0 {
            let re = 0.5 * (t[(k, k)] + t[(k + 1, k + 1)]);
            let im = t[(k, k + 1)].abs().sqrt() * t[(k + 1, k)].abs().sqrt();
            out.push(Complex::new(re, im));
            out.push(Complex::new(re, -im));
            k += 2;
        } else {
            out.push(Complex::new(t[(k, k)], 0.0));
            k += 1;
        }
    }
    out
}

/// Which side of the split line an eigenvalue belongs to.
///
/// With `threshold == 0` an eigenvalue of modulus at most `band` counts as
/// an exact zero and goes to the stable side. Any other eigenvalue whose
/// real part is within `band` of the line is ambiguous.
pub(crate) fn is_stable_side(lambda: Complex<f64>, threshold: f64, band: f64) -> Result<bool> {
    if threshold == 0.0 && lambda.norm() <= band {
        return Ok(true);
    }
    let offset = lambda.re - threshold;
    if offset.abs() <= band {
        return Err(Error::SplitAmbiguous {
            eigenvalue: lambda,
            tolerance: band,
        });
    }
    Ok(offset < 0.0)
}

/// Ordered real Schur form with every eigenvalue of real part at most
/// `threshold` in the leading block.
///
/// `split_rel` scales the ambiguity band `split_rel * ‖M‖_F` around the
/// threshold line.
pub fn ordered_real_schur_with(m: &RealMatrix, threshold: f64, split_rel: f64) -> Result<SchurForm> {
    let (mut u, mut t) = real_schur(m)?;
    let band = split_rel * m.norm();
    let n = t.nrows();

    let mut k_stable = 0;
    for lambda in block_eigenvalues(&t) {
        if is_stable_side(lambda, threshold, band)? {
            k_stable += 1;
        }
    }

    let block_stable = |t: &RealMatrix, start: usize| -> bool {
        let re = if start + 1 < n && t[(start + 1, start)] != 0.0 {
            0.5 * (t[(start, start)] + t[(start + 1, start + 1)])
        } else {
            t[(start, start)]
        };
        let im = if start + 1 < n && t[(start + 1, start)] != 0.0 {
            t[(start, start + 1)].abs().sqrt() * t[(start + 1, start)].abs().sqrt()
        } else {
            0.0
        };
        // ambiguity was ruled out above
        is_stable_side(Complex::new(re, im), threshold, band).unwrap_or(true)
    };

    // Bubble each stable block up past the anti-stable blocks before it.
    let mut first_free = 0;
    loop {
        let blocks = block_starts(&t);
        let Some(unstable_at) = blocks
            .iter()
            .copied()
            .filter(|&b| b >= first_free)
            .find(|&b| !block_stable(&t, b))
        else {
            break;
        };
        let Some(stable_at) = blocks
            .iter()
            .copied()
            .filter(|&b| b > unstable_at)
            .find(|&b| block_stable(&t, b))
        else {
            break;
        };

        let mut pos = stable_at;
        while pos > unstable_at {
            let prev = if pos >= 2 && t[(pos - 1, pos - 2)] != 0.0 { 2 } else { 1 };
            let size = block_size(&t, pos);
            swap_adjacent_blocks(&mut t, &mut u, pos - prev, prev, size)?;
            pos -= prev;
        }
        first_free = pos + block_size(&t, pos);
    }

    Ok(SchurForm { u, t, k_stable })
}

/// [`ordered_real_schur_with`] using the default split band of `1e-8 ‖M‖`.
pub fn ordered_real_schur(m: &RealMatrix, threshold: f64) -> Result<SchurForm> {
    ordered_real_schur_with(m, threshold, crate::Tolerances::default().split)
}

fn block_size(t: &RealMatrix, start: usize) -> usize {
    if start + 1 < t.nrows() && t[(start + 1, start)] != 0.0 {
        2
    } else {
        1
    }
}

fn block_starts(t: &RealMatrix) -> Vec<usize> {
    let n = t.nrows();
    let mut starts = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        starts.push(k);
        k += block_size(t, k);
    }
    starts
}

/// Apply the plane rotation `x ← c x + s y`, `y ← c y − s x` to two rows of
/// `m`, restricted to columns `cols`.
fn rotate_rows(m: &mut RealMatrix, r1: usize, r2: usize, cols: std::ops::Range<usize>, c: f64, s: f64) {
    for j in cols {
        let x = m[(r1, j)];
        let y = m[(r2, j)];
        m[(r1, j)] = c * x + s * y;
        m[(r2, j)] = c * y - s * x;
    }
}

fn rotate_cols(m: &mut RealMatrix, c1: usize, c2: usize, rows: std::ops::Range<usize>, c: f64, s: f64) {
    for i in rows {
        let x = m[(i, c1)];
        let y = m[(i, c2)];
        m[(i, c1)] = c * x + s * y;
        m[(i, c2)] = c * y - s * x;
    }
}

/// Rotation `(c, s)` with `[c s; −s c] [f; g] = [r; 0]`.
fn givens(f: f64, g: f64) -> (f64, f64) {
    if g == 0.0 {
        (1.0, 0.0)
    } else if f == 0.0 {
        (0.0, 1.0)
    } else {
        let r = f.hypot(g);
        (f / r, g / r)
    }
}

/// Householder reflector annihilating `v[1..]`. On return `v[0]` holds the
/// new leading entry and `v[1..]` the reflector tail (implicit leading 1).
/// Returns `tau`.
fn householder(v: &mut [f64]) -> f64 {
    let alpha = v[0];
    let xnorm = v[1..].iter().fold(0.0f64, |acc, x| acc.hypot(*x));
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -alpha.hypot(xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for x in v[1..].iter_mut() {
        *x *= scale;
    }
    v[0] = beta;
    tau
}

struct Standard2x2 {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    cs: f64,
    sn: f64,
}

/// Schur factorization of a real 2x2 block in standard form (LAPACK
/// `dlanv2`): `[a b; c d] = R [aa bb; cc dd] Rᵀ` with `R = [cs −sn; sn cs]`.
/// Either `cc == 0` (real eigenvalues) or `aa == dd` and `bb·cc < 0`.
fn standardize_2x2(mut a: f64, mut b: f64, mut c: f64, mut d: f64) -> Standard2x2 {
    let eps = f64::EPSILON;
    let (mut cs, mut sn);
    if c == 0.0 {
        cs = 1.0;
        sn = 0.0;
    } else if b == 0.0 {
        cs = 0.0;
        sn = 1.0;
        std::mem::swap(&mut a, &mut d);
        b = -c;
        c = 0.0;
    } else if a - d == 0.0 && b.signum() != c.signum() {
        cs = 1.0;
        sn = 0.0;
    } else {
        let temp = a - d;
        let mut p = 0.5 * temp;
        let bcmax = b.abs().max(c.abs());
        let bcmis = b.abs().min(c.abs()) * b.signum() * c.signum();
        let scale = p.abs().max(bcmax);
        let mut z = (p / scale) * p + (bcmax / scale) * bcmis;
        if z >= 4.0 * eps {
            // real eigenvalues
            z = p + (scale.sqrt() * z.sqrt()).copysign(p);
            a = d + z;
            d -= (bcmax / z) * bcmis;
            let tau = c.hypot(z);
            cs = z / tau;
            sn = c / tau;
            b -= c;
            c = 0.0;
        } else {
            // complex or nearly equal real eigenvalues: equalize the diagonal
            let sigma = b + c;
            let tau = sigma.hypot(temp);
            cs = (0.5 * (1.0 + sigma.abs() / tau)).sqrt();
            sn = -(p / (tau * cs)) * sigma.signum();

            let aa = a * cs + b * sn;
            let bb = -a * sn + b * cs;
            let cc = c * cs + d * sn;
            let dd = -c * sn + d * cs;

            a = aa * cs + cc * sn;
            b = bb * cs + dd * sn;
            c = -aa * sn + cc * cs;
            d = -bb * sn + dd * cs;

            let mid = 0.5 * (a + d);
            a = mid;
            d = mid;

            if c != 0.0 {
                if b != 0.0 {
                    if b.signum() == c.signum() {
                        // real eigenvalues after all: triangularize
                        let sab = b.abs().sqrt();
                        let sac = c.abs().sqrt();
                        p = (sab * sac).copysign(c);
                        let tau = 1.0 / (b + c).abs().sqrt();
                        a = mid + p;
                        d = mid - p;
                        b -= c;
                        c = 0.0;
                        let cs1 = sab * tau;
                        let sn1 = sac * tau;
                        let t = cs * cs1 - sn * sn1;
                        sn = cs * sn1 + sn * cs1;
                        cs = t;
                    }
                } else {
                    b = -c;
                    c = 0.0;
                    let t = cs;
                    cs = -sn;
                    sn = t;
                }
            }
        }
    }
    Standard2x2 { a, b, c, d, cs, sn }
}

/// Standardize the 2x2 diagonal block starting at `r`, updating the rest of
/// `t` and the Schur vectors.
fn standardize_block(t: &mut RealMatrix, u: &mut RealMatrix, r: usize) {
    let n = t.nrows();
    let s = standardize_2x2(t[(r, r)], t[(r, r + 1)], t[(r + 1, r)], t[(r + 1, r + 1)]);
    t[(r, r)] = s.a;
    t[(r, r + 1)] = s.b;
    t[(r + 1, r)] = s.c;
    t[(r + 1, r + 1)] = s.d;
    if r + 2 < n {
        rotate_rows(t, r, r + 1, r + 2..n, s.cs, s.sn);
    }
    rotate_cols(t, r, r + 1, 0..r, s.cs, s.sn);
    rotate_cols(u, r, r + 1, 0..u.nrows(), s.cs, s.sn);
}

/// Implicit double-shift QR on an upper Hessenberg `h`, accumulating the
/// transformations into `z`. Leaves `h` in standardized real Schur form.
fn francis_qr(h: &mut RealMatrix, z: &mut RealMatrix) -> Result<()> {
    let n = h.nrows();
    for j in 0..n.saturating_sub(2) {
        for i in j + 2..n {
            h[(i, j)] = 0.0;
        }
    }

    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let itmax = 30 * n.max(10);
    let mut kdefl = 0usize;

    // `i` is the bottom row of the active window.
    let mut i = n - 1;
    loop {
        let mut l = 0usize;
        let mut converged = false;

        for _ in 0..=itmax {
            let mut k = i;
            while k > l {
                let sub = h[(k, k - 1)].abs();
                if sub <= smlnum {
                    break;
                }
                let mut tst = h[(k - 1, k - 1)].abs() + h[(k, k)].abs();
                if tst == 0.0 {
                    if k >= 2 {
                        tst += h[(k - 1, k - 2)].abs();
                    }
                    if k + 1 < n {
                        tst += h[(k + 1, k)].abs();
                    }
                }
                if sub <= ulp * tst {
                    let ab = sub.max(h[(k - 1, k)].abs());
                    let ba = sub.min(h[(k - 1, k)].abs());
                    let diff = (h[(k - 1, k - 1)] - h[(k, k)]).abs();
                    let aa = h[(k, k)].abs().max(diff);
                    let bb = h[(k, k)].abs().min(diff);
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > 0 {
                h[(l, l - 1)] = 0.0;
            }
            if l + 1 >= i {
                converged = true;
                break;
            }
            kdefl += 1;

            let (h11, h12, h21, h22);
            if kdefl.is_multiple_of(2 * EXCEPTIONAL_EVERY) {
                let s = h[(i, i - 1)].abs() + h[(i - 1, i - 2)].abs();
                h11 = EXCEPTIONAL_DAT1 * s + h[(i, i)];
                h12 = EXCEPTIONAL_DAT2 * s;
                h21 = s;
                h22 = h11;
            } else if kdefl.is_multiple_of(EXCEPTIONAL_EVERY) {
                let s = h[(l + 1, l)].abs() + h[(l + 2, l + 1)].abs();
                h11 = EXCEPTIONAL_DAT1 * s + h[(l, l)];
                h12 = EXCEPTIONAL_DAT2 * s;
                h21 = s;
                h22 = h11;
            } else {
                h11 = h[(i - 1, i - 1)];
                h21 = h[(i, i - 1)];
                h12 = h[(i - 1, i)];
                h22 = h[(i, i)];
            }

            // Shifts: eigenvalues of the trailing 2x2 (or the exceptional block).
            let s = h11.abs() + h12.abs() + h21.abs() + h22.abs();
            let (rt1r, rt1i, rt2r, rt2i);
            if s == 0.0 {
                rt1r = 0.0;
                rt1i = 0.0;
                rt2r = 0.0;
                rt2i = 0.0;
            } else {
                let (h11, h12, h21, h22) = (h11 / s, h12 / s, h21 / s, h22 / s);
                let tr = 0.5 * (h11 + h22);
                let det = (h11 - tr) * (h22 - tr) - h12 * h21;
                let rtdisc = det.abs().sqrt();
                if det >= 0.0 {
                    rt1r = tr * s;
                    rt2r = rt1r;
                    rt1i = rtdisc * s;
                    rt2i = -rt1i;
                } else {
                    let a = tr + rtdisc;
                    let b = tr - rtdisc;
                    let pick = if (a - h22).abs() <= (b - h22).abs() { a } else { b };
                    rt1r = pick * s;
                    rt2r = rt1r;
                    rt1i = 0.0;
                    rt2i = 0.0;
                }
            }

            // Look for two consecutive small subdiagonals.
            let mut v = [0.0f64; 3];
            let mut m = i - 2;
            loop {
                let h21s = h[(m + 1, m)];
                let s = (h[(m, m)] - rt2r).abs() + rt2i.abs() + h21s.abs();
                let h21s = h21s / s;
                v[0] = h21s * h[(m, m + 1)] + (h[(m, m)] - rt1r) * ((h[(m, m)] - rt2r) / s)
                    - rt1i * (rt2i / s);
                v[1] = h21s * (h[(m, m)] + h[(m + 1, m + 1)] - rt1r - rt2r);
                v[2] = h21s * h[(m + 2, m + 1)];
                let s = v[0].abs() + v[1].abs() + v[2].abs();
                v.iter_mut().for_each(|x| *x /= s);
                if m == l {
                    break;
                }
                let h00 = h[(m, m - 1)].abs() * (v[1].abs() + v[2].abs());
                let h01 = v[0].abs() * (h[(m - 1, m - 1)].abs() + h[(m, m)].abs() + h[(m + 1, m + 1)].abs());
                if h00 <= ulp * h01 {
                    break;
                }
                m -= 1;
            }

            // Double-shift QR sweep, chasing the bulge from row m down to i.
            for k in m..i {
                let nr = 3.min(i - k + 1);
                if k > m {
                    for (r, slot) in v.iter_mut().enumerate().take(nr) {
                        *slot = h[(k + r, k - 1)];
                    }
                }
                let tau = householder(&mut v[..nr]);
                if k > m {
                    h[(k, k - 1)] = v[0];
                    h[(k + 1, k - 1)] = 0.0;
                    if k + 1 < i {
                        h[(k + 2, k - 1)] = 0.0;
                    }
                } else if m > l {
                    h[(k, k - 1)] *= 1.0 - tau;
                }
                let v2 = v[1];
                let t2 = tau * v2;
                if nr == 3 {
                    let v3 = v[2];
                    let t3 = tau * v3;
                    for j in k..n {
                        let sum = h[(k, j)] + v2 * h[(k + 1, j)] + v3 * h[(k + 2, j)];
                        h[(k, j)] -= sum * tau;
                        h[(k + 1, j)] -= sum * t2;
                        h[(k + 2, j)] -= sum * t3;
                    }
                    for j in 0..=(k + 3).min(i) {
                        let sum = h[(j, k)] + v2 * h[(j, k + 1)] + v3 * h[(j, k + 2)];
                        h[(j, k)] -= sum * tau;
                        h[(j, k + 1)] -= sum * t2;
                        h[(j, k + 2)] -= sum * t3;
                    }
                    for j in 0..n {
                        let sum = z[(j, k)] + v2 * z[(j, k + 1)] + v3 * z[(j, k + 2)];
                        z[(j, k)] -= sum * tau;
                        z[(j, k + 1)] -= sum * t2;
                        z[(j, k + 2)] -= sum * t3;
                    }
                } else if nr == 2 {
                    for j in k..n {
                        let sum = h[(k, j)] + v2 * h[(k + 1, j)];
                        h[(k, j)] -= sum * tau;
                        h[(k + 1, j)] -= sum * t2;
                    }
                    for j in 0..=i {
                        let sum = h[(j, k)] + v2 * h[(j, k + 1)];
                        h[(j, k)] -= sum * tau;
                        h[(j, k + 1)] -= sum * t2;
                    }
                    for j in 0..n {
                        let sum = z[(j, k)] + v2 * z[(j, k + 1)];
                        z[(j, k)] -= sum * tau;
                        z[(j, k + 1)] -= sum * t2;
                    }
                }
            }
        }

        if !converged {
            return Err(Error::ConvergenceFailure { iterations: itmax });
        }

        if l + 1 == i {
            standardize_block(h, z, l);
        }
        kdefl = 0;
        if l == 0 {
            break;
        }
        i = l - 1;
    }
    Ok(())
}

/// Exchange the adjacent diagonal blocks of sizes `p` (at `j`) and `q`
/// (at `j + p`) of a standardized quasi-triangular `t`, updating `u`.
pub(crate) fn swap_adjacent_blocks(
    t: &mut RealMatrix,
    u: &mut RealMatrix,
    j: usize,
    p: usize,
    q: usize,
) -> Result<()> {
    let n = t.nrows();
    let nu = u.nrows();

    if p == 1 && q == 1 {
        let t11 = t[(j, j)];
        let t22 = t[(j + 1, j + 1)];
        let (cs, sn) = givens(t[(j, j + 1)], t22 - t11);
        if j + 2 < n {
            rotate_rows(t, j, j + 1, j + 2..n, cs, sn);
        }
        rotate_cols(t, j, j + 1, 0..j, cs, sn);
        t[(j, j)] = t22;
        t[(j + 1, j + 1)] = t11;
        rotate_cols(u, j, j + 1, 0..nu, cs, sn);
        return Ok(());
    }

    let w = p + q;
    let a11 = t.view((j, j), (p, p)).clone_owned();
    let a12 = t.view((j, j + p), (p, q)).clone_owned();
    let a22 = t.view((j + p, j + p), (q, q)).clone_owned();
    let dnorm = t.view((j, j), (w, w)).amax();

    // [X; I] spans the invariant subspace of a22's eigenvalues when
    // a11 X − X a22 = −a12.
    let mut kron = DMatrix::<f64>::zeros(p * q, p * q);
    for c in 0..q {
        for r in 0..p {
            let row = r + c * p;
            for k in 0..p {
                kron[(row, k + c * p)] += a11[(r, k)];
            }
            for l in 0..q {
                kron[(row, r + l * p)] -= a22[(l, c)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(p * q, a12.iter().map(|v| -v));
    let x = kron.lu().solve(&rhs).ok_or(Error::SwapFailure)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SwapFailure);
    }

    let mut basis = DMatrix::<f64>::zeros(w, w);
    for c in 0..q {
        for r in 0..p {
            basis[(r, c)] = x[r + c * p];
        }
        basis[(p + c, c)] = 1.0;
    }
    for r in 0..p {
        basis[(r, q + r)] = 1.0;
    }
    let qmat = basis.qr().q();

    let rows_block = t.view((j, j), (w, n - j)).clone_owned();
    t.view_mut((j, j), (w, n - j)).copy_from(&(qmat.transpose() * rows_block));
    let cols_block = t.view((0, j), (j + w, w)).clone_owned();
    t.view_mut((0, j), (j + w, w)).copy_from(&(cols_block * &qmat));
    let u_block = u.view((0, j), (nu, w)).clone_owned();
    u.view_mut((0, j), (nu, w)).copy_from(&(u_block * &qmat));

    let residual = t.view((j + q, j), (p, q)).amax();
    let thresh = (1e3 * f64::EPSILON * dnorm).max(f64::MIN_POSITIVE);
    if residual > thresh {
        return Err(Error::SwapFailure);
    }
    t.view_mut((j + q, j), (p, q)).fill(0.0);

    if q == 2 {
        standardize_block(t, u, j);
    }
    if p == 2 {
        standardize_block(t, u, j + q);
    }
    Ok(())
}
