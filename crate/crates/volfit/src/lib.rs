//! Implied-volatility smile models, calibration, and Monte Carlo utilities
//! for forward-quoted European options.
//!
//! The crate is organised around a single pipeline:
//!
//! 1. [`market`] ingests option-chain CSVs and produces a [`calibrate::Smile`]
//!    of (strike, implied vol, weight) points over a [`black::ForwardContext`].
//! 2. Smile models — lognormal SABR ([`hagan`]), its skew extension
//!    ([`skew`]), [`svi`], a quartic polynomial ([`poly`]), and a least-squares
//!    cubic spline ([`spline`]) — map parameters to implied vols.
//! 3. [`calibrate`] fits any of those models to a smile by weighted least
//!    squares (multi-start bounded Nelder-Mead, or exact linear algebra where
//!    the model is linear).
//! 4. [`mc`] prices the underlying stochastic dynamics by Monte Carlo as an
//!    oracle for the asymptotic formulas, and [`harness`] compares fitted
//!    models across a corpus by RMSE.
//!
//! Everything is deterministic given explicit seeds: simulation paths use
//! per-path counter-based RNG streams and calibration starts are a fixed,
//! seeded sequence, so identical inputs reproduce identical outputs bit for
//! bit regardless of thread count.

// Reference values in tests keep the full decimal expansions they were
// computed with, a few digits beyond what an f64 literal can hold.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod black;
pub mod calibrate;
pub mod error;
pub mod hagan;
pub mod harness;
pub mod market;
pub mod mc;
pub mod optim;
pub mod poly;
pub mod skew;
pub mod spline;
pub mod svi;

pub use black::{black_price, black_vega, implied_vol, ForwardContext, OptionKind};
pub use calibrate::{fit, FitConfig, FitResult, FittedParams, ModelKind, Smile, SmilePoint};
pub use error::{Result, VolfitError};
pub use hagan::{sigma_hagan_beta1, sigma_hagan_full, SabrParams};
pub use skew::{sigma_skew, SkewSabrParams, SkewSdeParams};
