//! Plants, generic SISO realizations, and the checks that gate synthesis.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, ensure_finite, ensure_square, RealMatrix};
use crate::Tolerances;

/// The controlled SISO realization
///
/// ```text
/// ẋ = A x + B1 w + B2 u
/// z = C1 x
/// ```
///
/// where `w` is the disturbance, `u` the control input and `z` the
/// disturbance output. Dimensions and finiteness are checked on
/// construction; the fields are read-only afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    a: RealMatrix,
    b1: RealMatrix,
    b2: RealMatrix,
    c1: RealMatrix,
}

impl Plant {
    pub fn new(a: RealMatrix, b1: RealMatrix, b2: RealMatrix, c1: RealMatrix) -> Result<Plant> {
        let n = ensure_square(&a)?;
        if n == 0 {
            return Err(Error::DimensionMismatch("plant has no states".into()));
        }
        check_shape(&b1, (n, 1), "B1")?;
        check_shape(&b2, (n, 1), "B2")?;
        check_shape(&c1, (1, n), "C1")?;
        ensure_finite(&a, "A")?;
        ensure_finite(&b1, "B1")?;
        ensure_finite(&b2, "B2")?;
        ensure_finite(&c1, "C1")?;
        Ok(Plant { a, b1, b2, c1 })
    }

    /// Build from a row-major `A` and plain slices for the three vectors.
    pub fn from_slices(a: &[f64], b1: &[f64], b2: &[f64], c1: &[f64]) -> Result<Plant> {
        let n = b1.len();
        if a.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "A has {} entries, expected {}",
                a.len(),
                n * n
            )));
        }
        Plant::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_column_slice(n, 1, b1),
            DMatrix::from_column_slice(b2.len(), 1, b2),
            DMatrix::from_row_slice(1, c1.len(), c1),
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn b1(&self) -> &RealMatrix {
        &self.b1
    }
    pub fn b2(&self) -> &RealMatrix {
        &self.b2
    }
    pub fn c1(&self) -> &RealMatrix {
        &self.c1
    }

    /// `C1 B2`, the high-frequency gain of the control channel.
    pub fn c1b2(&self) -> f64 {
        (&self.c1 * &self.b2)[(0, 0)]
    }

    /// `C1 B1 + B1ᵀ C1ᵀ`, i.e. twice `C1 B1` in the SISO case.
    pub fn r_value(&self) -> f64 {
        2.0 * (&self.c1 * &self.b1)[(0, 0)]
    }

    /// `C1 B2`, or an error if it is numerically zero.
    pub fn control_gain(&self, tol: &Tolerances) -> Result<f64> {
        let c1b2 = self.c1b2();
        if c1b2.abs() > tol.assumption * (1.0 + self.c1.norm() * self.b2.norm()) {
            Ok(c1b2)
        } else {
            Err(Error::AssumptionA1Violated { c1b2 })
        }
    }

    /// `R`, or an error if it is not positive.
    pub fn disturbance_gain(&self, tol: &Tolerances) -> Result<f64> {
        let r = self.r_value();
        if r > tol.assumption * (1.0 + self.c1.norm() * self.b1.norm()) {
            Ok(r)
        } else {
            Err(Error::AssumptionA2Violated { r })
        }
    }

    /// The disturbance channel `(A, B1, C1, 0)`.
    pub fn disturbance_channel(&self) -> LtiSystem {
        LtiSystem {
            a: self.a.clone(),
            b: self.b1.clone(),
            c: self.c1.clone(),
            d: 0.0,
        }
    }

    /// The control-to-disturbance-output channel `(A, B2, C1, 0)`.
    pub fn control_channel(&self) -> LtiSystem {
        LtiSystem {
            a: self.a.clone(),
            b: self.b2.clone(),
            c: self.c1.clone(),
            d: 0.0,
        }
    }
}

fn check_shape(m: &RealMatrix, shape: (usize, usize), name: &str) -> Result<()> {
    if m.shape() != shape {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {}x{}",
            m.nrows(),
            m.ncols(),
            shape.0,
            shape.1
        )));
    }
    Ok(())
}

/// A SISO realization `(A, B, C, D)` with transfer function
/// `G(s) = C (sI − A)⁻¹ B + D`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: RealMatrix,
    b: RealMatrix,
    c: RealMatrix,
    d: f64,
}

impl LtiSystem {
    pub fn new(a: RealMatrix, b: RealMatrix, c: RealMatrix, d: f64) -> Result<LtiSystem> {
        let n = ensure_square(&a)?;
        if n == 0 {
            return Err(Error::DimensionMismatch("system has no states".into()));
        }
        check_shape(&b, (n, 1), "B")?;
        check_shape(&c, (1, n), "C")?;
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        ensure_finite(&c, "C")?;
        if !d.is_finite() {
            return Err(Error::NonFinite("D"));
        }
        Ok(LtiSystem { a, b, c, d })
    }

    pub fn from_slices(a: &[f64], b: &[f64], c: &[f64], d: f64) -> Result<LtiSystem> {
        let n = b.len();
        if a.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "A has {} entries, expected {}",
                a.len(),
                n * n
            )));
        }
        LtiSystem::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_column_slice(n, 1, b),
            DMatrix::from_row_slice(1, c.len(), c),
            d,
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn b(&self) -> &RealMatrix {
        &self.b
    }
    pub fn c(&self) -> &RealMatrix {
        &self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn poles(&self) -> Result<Vec<Complex<f64>>> {
        eigenvalues(&self.a)
    }

    /// Same input/output maps, state matrix replaced. Crate-internal
    /// because the caller guarantees the shape.
    pub(crate) fn with_state_matrix(&self, a: RealMatrix) -> LtiSystem {
        LtiSystem { a, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub c1b2: f64,
    pub a1_holds: bool,
    pub r_value: f64,
    pub a2_holds: bool,
    /// Controllability of `(A, B2)`.
    pub controllable: bool,
}

pub fn check_assumptions(plant: &Plant) -> AssumptionReport {
    check_assumptions_with(plant, &Tolerances::default())
}

pub fn check_assumptions_with(plant: &Plant, tol: &Tolerances) -> AssumptionReport {
    AssumptionReport {
        c1b2: plant.c1b2(),
        a1_holds: plant.control_gain(tol).is_ok(),
        r_value: plant.r_value(),
        a2_holds: plant.disturbance_gain(tol).is_ok(),
        controllable: is_controllable_with(plant.a(), plant.b2(), tol.rank)
            .expect("plant shapes are validated on construction"),
    }
}

/// Rank test on `[B, AB, …, Aⁿ⁻¹B]`; singular values below
/// `1e-8 · σ_max` count as zero.
pub fn is_controllable(a: &RealMatrix, b: &RealMatrix) -> Result<bool> {
    is_controllable_with(a, b, Tolerances::default().rank)
}

pub fn is_controllable_with(a: &RealMatrix, b: &RealMatrix, tol_rank: f64) -> Result<bool> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {n}x{n} but B has {} rows",
            b.nrows()
        )));
    }
    if n == 0 {
        return Ok(true);
    }
    let m = b.ncols();
    let mut ctrb = DMatrix::<f64>::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        ctrb.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    let sv = ctrb.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(false);
    }
    Ok(sv.iter().filter(|&&s| s > tol_rank * smax).count() == n)
}

/// `(A + B2 K, B1, C1, 0)`.
pub fn closed_loop(plant: &Plant, gain: &RealMatrix) -> Result<LtiSystem> {
    check_shape(gain, (1, plant.n()), "K")?;
    ensure_finite(gain, "K")?;
    Ok(LtiSystem {
        a: plant.a() + plant.b2() * gain,
        b: plant.b1().clone(),
        c: plant.c1().clone(),
        d: 0.0,
    })
}

/// `G(s)` for a single point. Fails if `s` is within
/// `1e-9 · max(1, ‖A‖)` of a pole.
pub fn transfer_eval(sys: &LtiSystem, s: Complex<f64>) -> Result<Complex<f64>> {
    FrequencyResponse::new(sys, &Tolerances::default())?.eval(s)
}

/// Repeated evaluation of one transfer function; the poles are computed
/// once up front for the proximity check.
#[derive(Debug, Clone)]
pub struct FrequencyResponse<'a> {
    sys: &'a LtiSystem,
    a: DMatrix<Complex<f64>>,
    b: DVector<Complex<f64>>,
    c: DVector<Complex<f64>>,
    poles: Vec<Complex<f64>>,
    radius: f64,
}

impl<'a> FrequencyResponse<'a> {
    pub fn new(sys: &'a LtiSystem, tol: &Tolerances) -> Result<FrequencyResponse<'a>> {
        let to_complex = |v: &f64| Complex::new(*v, 0.0);
        Ok(FrequencyResponse {
            sys,
            a: sys.a.map(|v| to_complex(&v)),
            b: DVector::from_iterator(sys.n(), sys.b.iter().map(to_complex)),
            c: DVector::from_iterator(sys.n(), sys.c.iter().map(to_complex)),
            poles: sys.poles()?,
            radius: tol.pole * sys.a.norm().max(1.0),
        })
    }

    pub fn poles(&self) -> &[Complex<f64>] {
        &self.poles
    }

    /// Distance from `s` to the nearest pole.
    pub fn pole_distance(&self, s: Complex<f64>) -> f64 {
        self.poles
            .iter()
            .map(|p| (s - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, s: Complex<f64>) -> Result<Complex<f64>> {
        let distance = self.pole_distance(s);
        if distance <= self.radius {
            return Err(Error::PoleProximity {
                re: s.re,
                im: s.im,
                distance,
            });
        }
        let n = self.sys.n();
        let shifted = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                s - self.a[(i, j)]
            } else {
                -self.a[(i, j)]
            }
        });
        let x = shifted.lu().solve(&self.b).ok_or(Error::PoleProximity {
            re: s.re,
            im: s.im,
            distance,
        })?;
        Ok(self.c.dot(&x) + self.sys.d)
    }
}
