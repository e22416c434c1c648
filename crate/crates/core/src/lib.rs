//! Exact prediction densities for Gaussian GARCH(1,1) and GJR-GARCH(1,1).
//!
//! The h-step-ahead law of x_h given the information at time 0 has a
//! density that expands as a power series in u² whose coefficients are
//! products of Tricomi confluent hypergeometric functions. This crate
//! evaluates those coefficients, the density, CDF and even moments built
//! from them, and the Value-at-Risk and Expected Shortfall that follow.
//! A Monte Carlo simulator provides an independent reference and the
//! replication counts it would need to match the exact values.
//!
//! ```
//! use garchpd::{density, model::GarchParams, risk};
//!
//! let params = GarchParams::linton();
//! let table = density::build_table(&params, 2, &density::SeriesConfig::default()).unwrap();
//! let (_, std) = density::standardize(&table).unwrap();
//! let r = risk::var_newton(&std, 0.05, &risk::RiskOptions::default()).unwrap();
//! assert!((r.var - 1.6415).abs() < 1e-4);
//! ```

pub mod cli;
pub mod density;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod risk;
pub mod rng;
pub mod specfun;
pub mod stationary;
pub mod sum;

pub use error::{Error, Result};
