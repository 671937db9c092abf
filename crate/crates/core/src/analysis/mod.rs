//! Verification and frontier analysis: negative-imaginary checks, the
//! Riccati certificate, the achievable degree of stability and ε sweeps.

mod bound;
mod diagnostics;
mod ni;
mod sweep;

pub use bound::{stability_bound, stability_bound_with, BoundCase, StabilityBoundReport};
pub use diagnostics::{degeneracy_diagnostics, degeneracy_diagnostics_with, DegeneracyReport};
pub use ni::{
    degree_of_stability, is_ni, is_sni, riccati_certificate_check, shift_realization, AxisPole,
    CertificateCheck, NiVerdict, SniVerdict,
};
pub use sweep::{linear_grid, sweep_epsilon, sweep_epsilon_with, FeasibilityProfile, SweepRecord};

use crate::error::{Error, Result};

fn validate_frequency_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(w) = grid.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidGrid(format!("frequency {w} is not a positive finite number")));
    }
    Ok(())
}
