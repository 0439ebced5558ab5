//! Tests for zero intercepts in high-dimensional linear factor pricing
//! models whose idiosyncratic errors are serially dependent.
//!
//! The crate fits `y_t = α + B f_t + ε_t` by OLS ([`regression`]) and tests
//! `H0: α = 0` three ways:
//!
//! - [`sum_test`]: `α̂ᵀα̂` standardized by long-run mean and split-sample
//!   variance estimates, powerful against many small alphas;
//! - [`max_test`]: the largest `T α̂_i² / σ̂_i` referred to a Gumbel-type
//!   limit, powerful against a few large alphas;
//! - [`combine`]: the Cauchy combination of the two p-values (and the
//!   minimal-p baseline).
//!
//! [`dgp`] and [`mc`] reproduce size and power studies on simulated
//! panels; [`panel_io`] reads CSV panels, runs rolling-window tests and
//! residual diagnostics.

pub mod combine;
pub mod dgp;
pub mod dist;
pub mod error;
pub mod mc;
pub mod outcome;
pub mod panel_io;
pub mod regression;
pub mod report;

mod linalg;

pub use combine::{cauchy_combine, min_p_combine};
pub use error::{Error, ErrorKind, Result};
pub use max_test::max_test;
pub use outcome::{Method, TestOutcome};
pub use regression::{fit_factor_model, projector_weights, Bandwidth, FactorFit, PanelData};
pub use report::{run_alpha_tests, AlphaTestReport};
pub use sum_test::sum_test;
