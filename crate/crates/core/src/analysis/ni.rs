use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::validate_frequency_grid;
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, min_symmetric_eigenvalue, RealMatrix};
use crate::plant::{FrequencyResponse, LtiSystem};
use crate::Tolerances;

type C64 = Complex<f64>;

/// Outcome of the strict negative-imaginary test on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SniVerdict {
    pub holds: bool,
    pub max_pole_re: f64,
    /// Grid frequency with the smallest margin.
    pub worst_omega: f64,
    /// `min −Im G(jω) / |G(jω)|` over the grid, i.e. the sine of the
    /// smallest phase lag below zero. Scale-free, so rolled-off high
    /// frequencies are judged on phase rather than on magnitude.
    pub margin: f64,
    /// `min −Im G(jω)` over the grid.
    pub raw_margin: f64,
}

/// Strict negative-imaginary test for a SISO system:
/// every pole in the open left half-plane and `Im G(jω) < 0` at every grid
/// frequency, the latter judged by the normalized margin against
/// `tol.sni`.
///
/// ```
/// use ni_stab::{analysis::is_sni, plant::LtiSystem, Config};
///
/// let lag = LtiSystem::from_slices(&[-1.0], &[1.0], &[1.0], 0.0).unwrap();
/// let cfg = Config::default();
/// assert!(is_sni(&lag, &cfg.grid.frequencies(), &cfg.tol).unwrap().holds);
/// ```
pub fn is_sni(sys: &LtiSystem, grid: &[f64], tol: &Tolerances) -> Result<SniVerdict> {
    validate_frequency_grid(grid)?;
    let fr = FrequencyResponse::new(sys, tol)?;
    let max_pole_re = fr.poles().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    let stable = max_pole_re < -tol.pole * sys.a().norm().max(1.0);

    let mut margin = f64::INFINITY;
    let mut raw_margin = f64::INFINITY;
    let mut worst_omega = grid[0];
    for &omega in grid {
        let (point, raw) = match fr.eval(C64::new(0.0, omega)) {
            Ok(g) if g.norm() > 0.0 => (-g.im / g.norm(), -g.im),
            Ok(_) => (0.0, 0.0),
            Err(Error::PoleProximity { .. }) => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        if point < margin {
            margin = point;
            worst_omega = omega;
        }
        raw_margin = raw_margin.min(raw);
    }
    Ok(SniVerdict {
        holds: stable && margin > tol.sni,
        max_pole_re,
        worst_omega,
        margin,
        raw_margin,
    })
}

/// A pole on the imaginary axis (upper half only), with the principal-part
/// coefficients of `G` there: `G(s) ≈ Σ c_k / (s − jω)^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisPole {
    pub omega: f64,
    pub order: usize,
    #[serde(skip)]
    pub coefficients: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NiVerdict {
    pub holds: bool,
    /// No observable and controllable pole in the open right half-plane.
    pub stable: bool,
    /// `−Im G(jω) ≥ 0` on the grid, away from poles.
    pub frequency_condition: bool,
    /// Nonzero axis poles are simple with a nonnegative real residue of `jG`.
    pub axis_residues: bool,
    /// A pole at the origin is at most double, with `lim s²G(s) ≥ 0`.
    pub origin: bool,
    pub margin: f64,
    pub axis_poles: Vec<AxisPole>,
    pub reason: Option<String>,
}

/// Negative-imaginary test for a SISO system. Imaginary-axis poles are
/// handled through spectral projectors rather than numerical limits, so
/// residues are exact up to rounding.
///
/// ```
/// use ni_stab::{analysis::is_ni, plant::LtiSystem, Config};
///
/// // 1/(s² + 1): simple poles at ±j, residue of jG at j is 1/2.
/// let osc = LtiSystem::from_slices(&[0.0, 1.0, -1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], 0.0).unwrap();
/// let cfg = Config::default();
/// let v = is_ni(&osc, &cfg.grid.frequencies(), &cfg.tol).unwrap();
/// assert!(v.holds);
/// assert!((v.axis_poles[0].omega - 1.0).abs() < 1e-12);
/// ```
pub fn is_ni(sys: &LtiSystem, grid: &[f64], tol: &Tolerances) -> Result<NiVerdict> {
    validate_frequency_grid(grid)?;
    let a = sys.a();
    let scale_a = a.norm().max(1.0);
    let radius = tol.distinct * scale_a;
    let bc = sys.b().norm() * sys.c().norm();

    let mut verdict = NiVerdict {
        holds: true,
        stable: true,
        frequency_condition: true,
        axis_residues: true,
        origin: true,
        margin: f64::INFINITY,
        axis_poles: Vec::new(),
        reason: None,
    };
    let fail = |v: &mut NiVerdict, why: String| {
        v.holds = false;
        v.reason.get_or_insert(why);
    };

    for (center, size) in clusters(&eigenvalues(a)?, radius) {
        if center.re < -radius || center.im < -radius {
            continue;
        }
        let coeffs = principal_part(sys, center, size);
        let negligible = |k: usize, c: &C64| c.norm() <= tol.eig * (1.0 + bc) * scale_a.powi(k as i32);
        let order = coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(k, c)| !negligible(*k, c))
            .map_or(0, |(k, _)| k + 1);
        if order == 0 {
            continue;
        }
        if center.re > radius {
            verdict.stable = false;
            fail(&mut verdict, format!("pole {:.6}{:+.6}j in the right half-plane", center.re, center.im));
            continue;
        }
        let omega = center.im.max(0.0);
        let on_origin = center.norm() <= radius;
        let res_tol = tol.eig * (1.0 + bc) * scale_a;
        if on_origin {
            if order > 2 {
                verdict.origin = false;
                fail(&mut verdict, format!("pole at the origin of order {order}"));
            } else if order == 2 && coeffs[1].re < -res_tol {
                verdict.origin = false;
                fail(&mut verdict, format!("lim s²G(s) = {:.6e} is negative", coeffs[1].re));
            }
        } else if order > 1 {
            verdict.axis_residues = false;
            fail(&mut verdict, format!("pole at {omega:.6}j has order {order}"));
        } else {
            // Residue of jG(s) at jω is j·c1; it must be real and ≥ 0.
            let residue = C64::new(0.0, 1.0) * coeffs[0];
            if residue.im.abs() > res_tol || residue.re < -res_tol {
                verdict.axis_residues = false;
                fail(
                    &mut verdict,
                    format!("residue of jG at {omega:.6}j is {:.6e}{:+.6e}j", residue.re, residue.im),
                );
            }
        }
        verdict.axis_poles.push(AxisPole {
            omega,
            order,
            coefficients: coeffs[..order].to_vec(),
        });
    }
    verdict.axis_poles.sort_by(|p, q| p.omega.total_cmp(&q.omega));

    let fr = FrequencyResponse::new(sys, tol)?;
    for &omega in grid {
        let g = match fr.eval(C64::new(0.0, omega)) {
            Ok(g) => g,
            Err(Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e),
        };
        let point = if g.norm() > 0.0 { -g.im / g.norm() } else { 0.0 };
        verdict.margin = verdict.margin.min(point);
        if -g.im < -tol.sni * g.norm().max(1.0) {
            verdict.frequency_condition = false;
            fail(&mut verdict, format!("Im G(j{omega:.6e}) = {:.6e} > 0", g.im));
        }
    }
    Ok(verdict)
}

/// Group eigenvalues lying within `radius` of one another.
fn clusters(eigs: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &l in eigs {
        match groups.iter_mut().find(|g| g.iter().any(|m| (m - l).norm() <= radius)) {
            Some(g) => g.push(l),
            None => groups.push(vec![l]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mut center = g.iter().sum::<C64>() / g.len() as f64;
            if center.im.abs() <= radius {
                center.im = 0.0;
            }
            (center, g.len())
        })
        .collect()
}

/// Coefficients `c_k = C N^{k−1} Π B`, `k = 1..=size`, of the principal
/// part of `G` at `center`, where `Π` is the spectral projector onto the
/// generalized eigenspace and `N = (A − center·I) Π`.
fn principal_part(sys: &LtiSystem, center: C64, size: usize) -> Vec<C64> {
    let n = sys.n();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let v = C64::new(sys.a()[(i, j)], 0.0);
        if i == j {
            v - center
        } else {
            v
        }
    });
    let mut power = DMatrix::<C64>::identity(n, n);
    for _ in 0..size {
        power = &power * &shifted;
    }
    let svd = power.svd(true, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let null = &order[..size];
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let right = DMatrix::from_fn(n, size, |i, k| v_t[(null[k], i)].conj());
    let left = DMatrix::from_fn(n, size, |i, k| u[(i, null[k])]);
    let gram = left.adjoint() * &right;
    let Some(gram_inv) = gram.try_inverse() else {
        return vec![C64::new(0.0, 0.0); size];
    };
    let projector = &right * gram_inv * left.adjoint();
    let nilpotent = &shifted * &projector;

    let b = sys.b().map(|v| C64::new(v, 0.0));
    let c = sys.c().map(|v| C64::new(v, 0.0));
    let mut x = &projector * b;
    let mut coeffs = Vec::with_capacity(size);
    for _ in 0..size {
        coeffs.push((&c * &x)[(0, 0)]);
        x = &nilpotent * x;
    }
    coeffs
}

/// `(A − εI, B, C, D)`: every pole moves left by `ε`.
pub fn shift_realization(sys: &LtiSystem, epsilon: f64) -> LtiSystem {
    let n = sys.n();
    sys.with_state_matrix(sys.a() - DMatrix::<f64>::identity(n, n) * epsilon)
}

/// Distance from the rightmost pole to the imaginary axis, `−max Re σ(A)`.
pub fn degree_of_stability(sys: &LtiSystem) -> Result<f64> {
    Ok(-sys.poles()?.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub holds: bool,
    /// Frobenius norm of the Riccati residual.
    pub residual: f64,
    /// Residual divided by the magnitude of the equation's terms.
    pub relative_residual: f64,
    pub p_min_eig: f64,
    /// Rightmost eigenvalue real part of `A − B R⁻¹ (CA − BᵀP)`.
    pub closure_max_re: f64,
}

/// Checks that `P` certifies the negative-imaginary property of
/// `(A, B, C)` through the Riccati equation
///
/// ```text
/// P A + Aᵀ P + (CA − BᵀP)ᵀ R⁻¹ (CA − BᵀP) = 0,   R = CB + BᵀCᵀ,
/// ```
///
/// with `P ⪰ 0` and `A − B R⁻¹ (CA − BᵀP)` having no eigenvalue in the
/// open right half-plane.
pub fn riccati_certificate_check(sys: &LtiSystem, p: &RealMatrix, tol: &Tolerances) -> Result<CertificateCheck> {
    let n = sys.n();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "P is {}x{}, system has {n} states",
            p.nrows(),
            p.ncols()
        )));
    }
    let (a, b, c) = (sys.a(), sys.b(), sys.c());
    let r = 2.0 * (c * b)[(0, 0)];
    if r.is_nan() || r <= 0.0 {
        return Err(Error::RNotPositive(r));
    }
    let p = (p + p.transpose()) * 0.5;
    let m = c * a - b.transpose() * &p;
    let residual_m = &p * a + a.transpose() * &p + m.transpose() * &m / r;
    let residual = residual_m.norm();
    let scale = 2.0 * p.norm() * a.norm() + (c.norm() * a.norm() + b.norm() * p.norm()).powi(2) / r;
    let relative_residual = if scale > 0.0 { residual / scale } else { residual };

    let p_min_eig = min_symmetric_eigenvalue(&p);
    let closure = a - b * &m / r;
    let closure_max_re = eigenvalues(&closure)?.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);

    let holds = p_min_eig >= -tol.psd * p.norm().max(1.0)
        && relative_residual <= tol.are
        && closure_max_re <= tol.split * closure.norm().max(1.0);
    Ok(CertificateCheck {
        holds,
        residual,
        relative_residual,
        p_min_eig,
        closure_max_re,
    })
}
