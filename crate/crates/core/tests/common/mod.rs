//! Independent oracles and random generators shared by the integration
//! tests. Nothing here calls into the library's numerical kernels.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use ni_stab::plant::Plant;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type C64 = Complex<f64>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn example_plant() -> Plant {
    Plant::from_slices(
        &[-1.0, 0.0, -1.0, 1.0, 0.0, -1.0, -1.0, 2.0, 1.0],
        &[1.0, 1.0, 1.0],
        &[0.0, 1.0, 1.0],
        &[1.0, 1.0, 0.0],
    )
    .unwrap()
}

pub fn uniform_matrix(rng: &mut StdRng, r: usize, c: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(lo..hi))
}

/// Orthogonal factor of a QR factorization of a random matrix.
pub fn random_orthogonal(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    uniform_matrix(rng, n, n, -1.0, 1.0).qr().q()
}

/// Solve `F X + X Fᵀ + W = 0` through the `n² × n²` Kronecker system
/// `(I ⊗ F + F ⊗ I) vec X = −vec W`.
pub fn kron_lyapunov(f: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let big = id.kronecker(f) + f.kronecker(&id);
    let rhs = -DVector::from_column_slice(w.as_slice());
    let x = big.lu().solve(&rhs).expect("Kronecker system is nonsingular");
    DMatrix::from_column_slice(n, n, x.as_slice())
}

/// Characteristic polynomial coefficients `c[0..=n]` (ascending, monic)
/// and the matrices `M_k` with `adj(sI − A) = Σ_k s^{n−k} M_k`, by
/// Faddeev–LeVerrier.
pub fn faddeev_leverrier(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut ms = Vec::with_capacity(n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * c[n - k + 1];
        c[n - k] = -(a * &m).trace() / k as f64;
        ms.push(m.clone());
    }
    (c, ms)
}

pub fn poly_eval(c: &[f64], s: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &v| acc * s + v)
}

/// `C adj(sI − A) B / det(sI − A) + D` from the polynomial form.
pub fn transfer_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: f64, s: C64) -> C64 {
    let n = a.nrows();
    let (coeffs, ms) = faddeev_leverrier(a);
    let mut num = C64::new(0.0, 0.0);
    for (k, m) in ms.iter().enumerate() {
        let scalar = (c * m * b)[(0, 0)];
        num += s.powi((n - k - 1) as i32) * scalar;
    }
    num / poly_eval(&coeffs, s) + d
}

pub fn det3(m: &DMatrix<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Largest distance over a greedy nearest-neighbour pairing of two
/// multisets of equal size.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets differ in size");
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// What the nonzero eigenvalues of the zero-dynamics matrix look like.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroLayout {
    /// One positive real eigenvalue, the rest stable.
    OneUnstable,
    /// All stable.
    NoUnstable,
    /// Anything distinct, with a random number of unstable eigenvalues.
    Mixed,
}

/// A random plant with prescribed zero dynamics, and the nonzero
/// eigenvalues of its `A_q` (known by construction).
pub struct RandomPlant {
    pub plant: Plant,
    pub zeros: Vec<C64>,
}

impl RandomPlant {
    /// `−Re` of the rightmost stable zero.
    pub fn gamma(&self) -> f64 {
        -self.zeros.iter().filter(|z| z.re < 0.0).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn random_spectrum(rng: &mut StdRng, count: usize, layout: ZeroLayout) -> Vec<C64> {
    loop {
        let mut zeros = Vec::new();
        let mut stable_left = count;
        match layout {
            ZeroLayout::OneUnstable => {
                zeros.push(C64::new(rng.gen_range(0.5..3.0), 0.0));
                stable_left -= 1;
            }
            ZeroLayout::Mixed => {
                let k = rng.gen_range(0..=count.min(2));
                for _ in 0..k {
                    zeros.push(C64::new(rng.gen_range(0.3..3.0), 0.0));
                }
                stable_left -= k;
            }
            ZeroLayout::NoUnstable => {}
        }
        while stable_left > 0 {
            let re = -rng.gen_range(0.3..3.0);
            if stable_left >= 2 && rng.gen_bool(0.4) {
                let im = rng.gen_range(0.3..2.0);
                zeros.push(C64::new(re, im));
                zeros.push(C64::new(re, -im));
                stable_left -= 2;
            } else {
                zeros.push(C64::new(re, 0.0));
                stable_left -= 1;
            }
        }
        let mut all = zeros.clone();
        all.push(C64::new(0.0, 0.0));
        let separated = all
            .iter()
            .enumerate()
            .all(|(i, a)| all[i + 1..].iter().all(|b| (a - b).norm() > 0.1));
        if separated {
            return zeros;
        }
    }
}

/// Block-diagonal real matrix with a leading zero and the given
/// eigenvalues (conjugate pairs as adjacent entries, real-form 2×2 blocks).
fn real_block_diagonal(zeros: &[C64]) -> DMatrix<f64> {
    let n = zeros.len() + 1;
    let mut d = DMatrix::<f64>::zeros(n, n);
    let mut i = 0;
    while i < zeros.len() {
        let z = zeros[i];
        let k = i + 1;
        if z.im != 0.0 {
            d[(k, k)] = z.re;
            d[(k + 1, k + 1)] = z.re;
            d[(k, k + 1)] = z.im;
            d[(k + 1, k)] = -z.im;
            i += 2;
        } else {
            d[(k, k)] = z.re;
            i += 1;
        }
    }
    d
}

/// Random plant with `A_q = V D V⁻¹`, `D = diag(0, zeros)`, `C1` the first
/// row of `V⁻¹`, and `A = A_q + B2 r` for a random row `r`; then
/// `Q A = A_q` exactly in exact arithmetic. `(A, B2)` is controllable.
pub fn random_plant(rng: &mut StdRng, n: usize, layout: ZeroLayout) -> RandomPlant {
    loop {
        let zeros = random_spectrum(rng, n - 1, layout);
        let scales = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0)));
        let v = random_orthogonal(rng, n) * scales * random_orthogonal(rng, n);
        let v_inv = v.clone().try_inverse().unwrap();
        let m = &v * real_block_diagonal(&zeros) * &v_inv;
        let c1 = v_inv.rows(0, 1).into_owned();

        let b2 = uniform_matrix(rng, n, 1, -1.0, 1.0);
        let c1b2 = (&c1 * &b2)[(0, 0)];
        if c1b2.abs() < 0.5 {
            continue;
        }
        let mut b1 = uniform_matrix(rng, n, 1, -1.0, 1.0);
        let c1b1 = (&c1 * &b1)[(0, 0)];
        if c1b1.abs() < 0.1 {
            continue;
        }
        if c1b1 < 0.0 {
            b1 = -b1;
        }
        let r = uniform_matrix(rng, 1, n, -1.0, 1.0);
        let a = &m + &b2 * r;

        let mut ctrb = DMatrix::<f64>::zeros(n, n);
        let mut col = b2.clone();
        for k in 0..n {
            ctrb.set_column(k, &col.column(0));
            col = &a * col;
        }
        let sv = ctrb.singular_values();
        if sv.min() < 1e-6 * sv.max() {
            continue;
        }
        let plant = Plant::new(a, b1, b2, c1).unwrap();
        return RandomPlant { plant, zeros };
    }
}

/// A plant with independent uniform entries satisfying the two channel
/// assumptions with margin.
pub fn random_generic_plant(rng: &mut StdRng, n: usize) -> Plant {
    loop {
        let a = uniform_matrix(rng, n, n, -2.0, 2.0);
        let b1 = uniform_matrix(rng, n, 1, -1.0, 1.0);
        let b2 = uniform_matrix(rng, n, 1, -1.0, 1.0);
        let c1 = uniform_matrix(rng, 1, n, -1.0, 1.0);
        let c1b2 = (&c1 * &b2)[(0, 0)];
        let c1b1 = (&c1 * &b1)[(0, 0)];
        if c1b2.abs() > 0.2 && c1b1 > 0.1 {
            return Plant::new(a, b1, b2, c1).unwrap();
        }
    }
}

/// Random Hurwitz matrix `Q T Qᵀ` with `T` quasi-triangular, negative real
/// parts on the diagonal blocks, and a few complex pairs.
pub fn random_hurwitz(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let mut t = uniform_matrix(rng, n, n, -1.0, 1.0).upper_triangle();
    let mut i = 0;
    while i < n {
        let re = -rng.gen_range(0.2..3.0);
        if i + 1 < n && rng.gen_bool(0.4) {
            let im = rng.gen_range(0.2..2.0);
            t[(i, i)] = re;
            t[(i + 1, i + 1)] = re;
            t[(i, i + 1)] = im;
            t[(i + 1, i)] = -im;
            i += 2;
        } else {
            t[(i, i)] = re;
            i += 1;
        }
    }
    let q = random_orthogonal(rng, n);
    &q * t * q.transpose()
}

pub fn random_symmetric(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let g = uniform_matrix(rng, n, n, -1.0, 1.0);
    &g + g.transpose()
}
