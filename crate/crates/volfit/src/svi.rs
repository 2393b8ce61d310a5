//! Raw-SVI total-variance smile parameterisation.
//!
//! SVI models the *total implied variance* `w = sigma^2 tau` as a function of
//! log-moneyness `k = ln(K/f)`:
//!
//! ```text
//!     w(k) = a + b [ rho (k - m) + sqrt((k - m)^2 + s^2) ]
//! ```
//!
//! with `a > 0`, `b > 0`, `|rho| <= 1`, `s > 0`. The curve is convex in `k`
//! and asymptotically linear with wing slopes `b (rho + 1)` on the right and
//! `b (rho - 1)` on the left; `m` centres the vertex and `s` rounds it.
//! Implied volatility follows as `sigma(k) = sqrt(w(k) / tau)`.
//!
//! # References
//! - Gatheral, J. (2004), "A parsimonious arbitrage-free implied volatility
//!   parameterization with application to the valuation of volatility
//!   derivatives".
//! - Gatheral, J., Jacquier, A. (2014), "Arbitrage-free SVI volatility
//!   surfaces".

use serde::{Deserialize, Serialize};

use crate::black::ForwardContext;
use crate::error::{Result, VolfitError};

/// Raw-SVI parameters over log-moneyness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SviParams {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub m: f64,
    pub sigma: f64,
}

impl SviParams {
    pub fn new(a: f64, b: f64, rho: f64, m: f64, sigma: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(VolfitError::invalid(format!(
                "svi a must be finite and positive, got {a}"
            )));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(VolfitError::invalid(format!(
                "svi b must be finite and positive, got {b}"
            )));
        }
        if !(rho.is_finite() && rho.abs() <= 1.0) {
            return Err(VolfitError::invalid(format!(
                "svi rho must lie in [-1, 1], got {rho}"
            )));
        }
        if !m.is_finite() {
            return Err(VolfitError::invalid(format!("svi m must be finite, got {m}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(VolfitError::invalid(format!(
                "svi sigma must be finite and positive, got {sigma}"
            )));
        }
        Ok(SviParams { a, b, rho, m, sigma })
    }

    /// Total implied variance `w(k)` at log-moneyness `k`.
    pub fn total_variance(&self, k: f64) -> f64 {
        let km = k - self.m;
        self.a + self.b * (self.rho * km + (km * km + self.sigma * self.sigma).sqrt())
    }

    /// Implied volatility at `strike`; errors if the total variance is
    /// negative there (possible only outside the constraint set, e.g. with
    /// caller-supplied parameter boxes admitting `a <= 0`).
    pub fn vol(&self, ctx: &ForwardContext, strike: f64) -> Result<f64> {
        ForwardContext::new(ctx.forward, ctx.tau)?;
        if !(strike.is_finite() && strike > 0.0) {
            return Err(VolfitError::invalid(format!(
                "strike must be finite and positive, got {strike}"
            )));
        }
        let w = self.total_variance(ctx.log_moneyness(strike));
        if w < 0.0 {
            return Err(VolfitError::no_solution(format!(
                "svi total variance {w} is negative at strike {strike}"
            )));
        }
        Ok((w / ctx.tau).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SviParams {
        SviParams::new(0.04, 0.1, -0.3, 0.0, 0.2).unwrap()
    }

    #[test]
    fn total_variance_matches_frozen_reference() {
        // Frozen: 0.04 + 0.1 (-0.15 + sqrt(0.29)) at k = 0.5.
        let w = params().total_variance(0.5);
        assert!((w - 0.07885164807134504).abs() < 1e-15, "{w}");
    }

    #[test]
    fn vol_is_sqrt_of_variance_over_tau() {
        let ctx = ForwardContext::new(100.0, 0.25).unwrap();
        let k: f64 = 0.5;
        let strike = 100.0 * k.exp();
        let vol = params().vol(&ctx, strike).unwrap();
        assert!((vol - (params().total_variance(0.5) / 0.25).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn variance_is_positive_inside_the_constraint_set() {
        // With a > 0, b > 0, |rho| <= 1 the sqrt term dominates the linear
        // one, so w >= a > 0 everywhere.
        let p = SviParams::new(0.01, 0.5, -1.0, 0.3, 0.05).unwrap();
        for i in -50..=50 {
            let k = i as f64 * 0.2;
            assert!(p.total_variance(k) >= p.a - 1e-15);
        }
    }

    #[test]
    fn variance_is_convex_in_log_moneyness() {
        let p = SviParams::new(0.02, 0.4, 0.6, -0.1, 0.3).unwrap();
        let h = 0.05;
        for i in -40..=40 {
            let k = i as f64 * 0.1;
            let second =
                p.total_variance(k + h) - 2.0 * p.total_variance(k) + p.total_variance(k - h);
            assert!(second >= -1e-12, "convexity violated at k={k}: {second}");
        }
    }

    #[test]
    fn wing_slopes_approach_their_asymptotes() {
        let p = params();
        let h = 1.0;
        let right = (p.total_variance(60.0 + h) - p.total_variance(60.0)) / h;
        let left = (p.total_variance(-60.0) - p.total_variance(-60.0 - h)) / h;
        assert!((right - p.b * (p.rho + 1.0)).abs() < 1e-3, "right {right}");
        assert!((left - p.b * (p.rho - 1.0)).abs() < 1e-3, "left {left}");
    }

    #[test]
    fn negative_variance_from_invalid_fields_is_a_domain_error() {
        // Bypass the constructor to mimic a caller-supplied box with a < 0.
        let p = SviParams { a: -0.5, b: 0.1, rho: 0.0, m: 0.0, sigma: 0.1 };
        let ctx = ForwardContext::new(100.0, 0.5).unwrap();
        assert!(matches!(
            p.vol(&ctx, 100.0),
            Err(VolfitError::NoSolution { .. })
        ));
    }

    #[test]
    fn constructor_rejects_out_of_domain_parameters() {
        assert!(SviParams::new(0.0, 0.1, 0.0, 0.0, 0.1).is_err());
        assert!(SviParams::new(0.04, 0.0, 0.0, 0.0, 0.1).is_err());
        assert!(SviParams::new(0.04, 0.1, 1.01, 0.0, 0.1).is_err());
        assert!(SviParams::new(0.04, 0.1, 0.0, f64::NAN, 0.1).is_err());
        assert!(SviParams::new(0.04, 0.1, 0.0, 0.0, 0.0).is_err());
    }
}
