//! Strictly negative imaginary state-feedback synthesis with a prescribed
//! degree of stability, for SISO plants
//!
//! ```text
//! ẋ = A x + B1 w + B2 u,   z = C1 x.
//! ```
//!
//! The entry points are [`synthesis::synthesize`] for a gain at a given ε,
//! [`analysis::stability_bound`] for the largest ε the method can
//! guarantee, and [`analysis::sweep_epsilon`] to trace the frontier
//! numerically.
//!
//! ```
//! use ni_stab::{analysis::stability_bound, plant::Plant, synthesis::synthesize};
//!
//! let plant = Plant::from_slices(
//!     &[-1.0, 0.0, -1.0, 1.0, 0.0, -1.0, -1.0, 2.0, 1.0],
//!     &[1.0, 1.0, 1.0],
//!     &[0.0, 1.0, 1.0],
//!     &[1.0, 1.0, 0.0],
//! )?;
//! let gamma = stability_bound(&plant)?.gamma.unwrap();
//! assert!(synthesize(&plant, 0.9 * gamma)?.feasible);
//! assert!(!synthesize(&plant, 1.1 * gamma)?.feasible);
//! # Ok::<(), ni_stab::Error>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod matrix;
pub mod plant;
pub mod synthesis;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::{Config, GridSpec, Tolerances};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/negative-imaginary.md")]
    mod negative_imaginary {}
    #[doc = include_str!("../../../book/src/structural-matrices.md")]
    mod structural_matrices {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    mod synthesis {}
    #[doc = include_str!("../../../book/src/stability-bound.md")]
    mod stability_bound {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
