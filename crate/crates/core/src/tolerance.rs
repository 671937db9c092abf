//! Numerical thresholds shared by every module.
//!
//! Relative tolerances are scaled by the Frobenius norm of the matrix they
//! judge, as noted on each field.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Half-width of the band around the stable/anti-stable split line,
    /// relative to `‖M‖`.
    pub split: f64,
    /// Eigenvalue / eigenvector residual relative to `‖M‖`.
    pub eig: f64,
    /// Thresholds for `C1B2 ≠ 0` and `C1B1 > 0`, relative to `1 + ‖inputs‖`.
    pub assumption: f64,
    /// Singular-value cutoff for rank decisions, relative to `σ_max`.
    pub rank: f64,
    /// PSD acceptance: `λ_min ≥ −psd·‖·‖`.
    pub psd: f64,
    /// PD acceptance for the slack `X = T − S`: `λ_min > pd·(‖T‖ + ‖S‖)`.
    pub pd: f64,
    /// Strict negative-imaginary margin on the frequency grid.
    pub sni: f64,
    /// Pole proximity / open-left-half-plane margin, relative to `max(1, ‖A‖)`.
    pub pole: f64,
    /// Riccati residual relative to the magnitude of its terms.
    pub are: f64,
    /// Minimum pairwise eigenvalue gap for distinctness, and the cluster
    /// radius used for imaginary-axis poles, relative to `max(1, ‖A‖)`.
    pub distinct: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            split: 1e-8,
            eig: 1e-8,
            assumption: 1e-10,
            rank: 1e-8,
            psd: 1e-9,
            pd: 1e-9,
            sni: 1e-9,
            pole: 1e-9,
            are: 1e-8,
            distinct: 1e-6,
        }
    }
}

/// Frequency grid used by the frequency-domain NI/SNI checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            omega_min: 1e-4,
            omega_max: 1e4,
            points: 2000,
        }
    }
}

impl GridSpec {
    /// Logarithmically spaced frequencies, both endpoints included.
    pub fn frequencies(&self) -> Vec<f64> {
        log_grid(self.omega_min, self.omega_max, self.points)
    }
}

pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (lo, hi) = (min.log10(), max.log10());
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| 10f64.powf(lo + step * i as f64))
                .collect()
        }
    }
}

/// Tolerances plus the verification grid; what the higher-level
/// operations (synthesis verification, sweeps, the CLI) are configured by.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Config {
    pub tol: Tolerances,
    pub grid: GridSpec,
}
