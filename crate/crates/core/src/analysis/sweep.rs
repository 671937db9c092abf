use serde::Serialize;

use super::bound::{stability_bound_with, BoundCase};
use super::ni::is_sni;
use crate::error::{Error, Result};
use crate::matrix::spectral_abscissa;
use crate::plant::{closed_loop, Plant};
use crate::synthesis::{synthesize_with, Branch};
use crate::Config;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub feasible: bool,
    pub branch: Option<Branch>,
    pub x_min_eig: Option<f64>,
    /// Rightmost closed-loop pole; only for feasible records.
    pub max_pole_re: Option<f64>,
    /// Closed-loop SNI verdict; `false` when infeasible.
    pub sni: bool,
    /// Why a record was forced infeasible by a numerical failure.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityProfile {
    pub grid: Vec<f64>,
    pub records: Vec<SweepRecord>,
    /// Largest grid ε with a feasible synthesis.
    pub empirical_max_eps: Option<f64>,
    pub theoretical_gamma: Option<f64>,
    pub bound_case: BoundCase,
}

/// `steps` equally spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 steps, got {steps}")));
    }
    if !(min.is_finite() && max.is_finite() && 0.0 < min && min < max) {
        return Err(Error::InvalidGrid(format!("need 0 < min < max, got [{min}, {max}]")));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { max } else { min + h * i as f64 })
        .collect())
}

/// Synthesize and verify at every ε of `grid`.
pub fn sweep_epsilon(plant: &Plant, grid: &[f64]) -> Result<FeasibilityProfile> {
    sweep_epsilon_with(plant, grid, &Config::default())
}

/// Records are independent, so they are computed on scoped threads and
/// collected in grid order. Only assumption violations abort the sweep;
/// any other numerical failure yields an infeasible record with a note.
pub fn sweep_epsilon_with(plant: &Plant, grid: &[f64], config: &Config) -> Result<FeasibilityProfile> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid("ε grid must be positive and strictly increasing".into()));
    }
    plant.control_gain(&config.tol)?;
    plant.disturbance_gain(&config.tol)?;
    let bound = stability_bound_with(plant, &config.tol)?;

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(grid.len());
    let chunk = grid.len().div_ceil(workers);
    let records = std::thread::scope(|scope| {
        let handles: Vec<_> = grid
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&e| sweep_point(plant, e, config)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let empirical_max_eps = records.iter().filter(|r| r.feasible).map(|r| r.epsilon).next_back();
    Ok(FeasibilityProfile {
        grid: grid.to_vec(),
        records,
        empirical_max_eps,
        theoretical_gamma: bound.gamma,
        bound_case: bound.case,
    })
}

fn sweep_point(plant: &Plant, epsilon: f64, config: &Config) -> Result<SweepRecord> {
    let infeasible = |note: Option<String>| SweepRecord {
        epsilon,
        feasible: false,
        branch: None,
        x_min_eig: None,
        max_pole_re: None,
        sni: false,
        note,
    };
    let outcome = match synthesize_with(plant, epsilon, &config.tol) {
        Ok(o) => o,
        Err(e @ (Error::AssumptionA1Violated { .. } | Error::AssumptionA2Violated { .. })) => return Err(e),
        Err(e) => return Ok(infeasible(Some(e.to_string()))),
    };
    let mut record = SweepRecord {
        branch: Some(outcome.branch),
        x_min_eig: outcome.x_min_eig,
        ..infeasible(None)
    };
    if let Some(gain) = &outcome.gain {
        let verify = || -> Result<(f64, bool)> {
            let cl = closed_loop(plant, gain)?;
            let sni = is_sni(&cl, &config.grid.frequencies(), &config.tol)?;
            Ok((spectral_abscissa(cl.a())?, sni.holds))
        };
        match verify() {
            Ok((max_re, sni)) => {
                record.feasible = true;
                record.max_pole_re = Some(max_re);
                record.sni = sni;
            }
            Err(e) => record.note = Some(e.to_string()),
        }
    }
    Ok(record)
}
