use nalgebra::Complex;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix {0} contains a non-finite entry")]
    NonFinite(&'static str),

    #[error("QR iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("{re}{im:+}j is not an eigenvalue (smallest singular value {residual:e})")]
    NotAnEigenvalue { re: f64, im: f64, residual: f64 },

    #[error(
        "eigenvalue {}{:+}j lies within {tolerance:e} of the split line; stable/anti-stable assignment is ambiguous",
        eigenvalue.re, eigenvalue.im
    )]
    SplitAmbiguous { eigenvalue: Complex<f64>, tolerance: f64 },

    #[error("diagonal block exchange failed: eigenvalues too close to reorder")]
    SwapFailure,

    #[error("coefficient matrix is not Hurwitz (max real part {max_real:e})")]
    NotHurwitz { max_real: f64 },

    #[error("right-hand side is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("s = {re}{im:+}j is within {distance:e} of a pole")]
    PoleProximity { re: f64, im: f64, distance: f64 },

    #[error("assumption A1 violated: C1*B2 = {c1b2:e} is numerically zero")]
    AssumptionA1Violated { c1b2: f64 },

    #[error("assumption A2 violated: R = C1*B1 + B1'*C1' = {r:e} is not positive")]
    AssumptionA2Violated { r: f64 },

    #[error("slack matrix X = T - S is numerically singular (min eigenvalue {min_eig:e})")]
    InversionFailure { min_eig: f64 },

    #[error("A_r has {dim} anti-stable eigenvalue(s); use the Lyapunov-based gain instead")]
    AntistableBlockPresent { dim: usize },

    #[error("epsilon must be finite and strictly positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("frequency grid is empty")]
    EmptyGrid,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("R = CB + B'C' = {0:e} is not positive")]
    RNotPositive(f64),

    #[error("A_r has no anti-stable eigenvalue")]
    NoAntistableEigenvalue,
}
