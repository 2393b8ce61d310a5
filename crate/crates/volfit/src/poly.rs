//! Quartic polynomial smile in log-moneyness.
//!
//! A deliberately structure-free benchmark: implied volatility is modelled as
//! a degree-4 polynomial of `k = ln(K/f)`,
//!
//! ```text
//!     sigma(k) = a0 + a1 k + a2 k^2 + a3 k^3 + a4 k^4,
//! ```
//!
//! matching the five-parameter budget of the stochastic-volatility models it
//! is compared against. Evaluation uses Horner's scheme; fitting is an exact
//! weighted linear least-squares solve (see [`crate::calibrate`]).

use serde::{Deserialize, Serialize};

use crate::black::ForwardContext;
use crate::error::{Result, VolfitError};

/// Number of polynomial coefficients (degree 4).
pub const N_COEFFS: usize = 5;

/// Coefficients `a0..a4` of the quartic smile, lowest order first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyParams {
    pub coeffs: [f64; N_COEFFS],
}

impl PolyParams {
    pub fn new(coeffs: [f64; N_COEFFS]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(VolfitError::invalid(format!(
                "polynomial coefficients must be finite, got {coeffs:?}"
            )));
        }
        Ok(PolyParams { coeffs })
    }

    /// Horner evaluation at log-moneyness `k`.
    pub fn eval(&self, k: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * k + c)
    }

    /// Implied volatility at `strike`. Like the other affine-corrected
    /// models, the value may be non-positive for extreme coefficients and is
    /// returned unclamped.
    pub fn vol(&self, ctx: &ForwardContext, strike: f64) -> Result<f64> {
        ForwardContext::new(ctx.forward, ctx.tau)?;
        if !(strike.is_finite() && strike > 0.0) {
            return Err(VolfitError::invalid(format!(
                "strike must be finite and positive, got {strike}"
            )));
        }
        Ok(self.eval(ctx.log_moneyness(strike)))
    }
}
