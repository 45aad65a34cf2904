//! Ultracold atoms in an asymmetric two-dimensional magnetic lattice.
//!
//! The crate follows the physics pipeline in order:
//!
//! * [`field`]: analytic field magnitude above a magnetized film patterned
//!   with square holes, its gradient, curvatures and plane slices;
//! * [`trap`]: trap minima, barrier heights, trap frequencies and depths,
//!   bias scans;
//! * [`modes`]: Gaussian site modes and the zero-point, self-interaction and
//!   Josephson-coupling integrals;
//! * [`dynamics`]: two-mode (N, θ) phase-space evolution with its exact
//!   Rabi solution, and the n-site tridiagonal amplitude chain.
//!
//! All internal quantities are SI. Configuration files use µm, G and kG; see
//! [`config`] and [`units`].

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod field;
pub mod modes;
mod optimize;
pub mod quadrature;
pub mod trap;
pub mod units;

pub use config::{
    parse_config, AnalysisSettings, AtomSpecies, FrequencyMode, LatticeConfig, RunConfig,
};
pub use error::{Error, ErrorKind, Result};

// The guide's code blocks run as doctests so they cannot drift from the API.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/field.md")]
    mod field {}
    #[doc = include_str!("../../../book/src/traps.md")]
    mod traps {}
    #[doc = include_str!("../../../book/src/couplings.md")]
    mod couplings {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/recipes.md")]
    mod recipes {}
}
