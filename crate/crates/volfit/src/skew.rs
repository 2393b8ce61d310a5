//! Skew extension of the lognormal-SABR smile.
//!
//! The model adds an affine correction in log-moneyness to the Hagan
//! backbone:
//!
//! ```text
//!     sigma(K) = sigma_hagan_beta1(alpha, rho, nu; K) + c ln(K/f) + d
//! ```
//!
//! giving five parameters `(alpha, rho, nu, c, d)`. Near the money the roles
//! separate cleanly: `alpha + d` sets the level, `rho nu / 2 + c` the slope,
//! and `(1/6 - rho^2/4) nu^2 / alpha` the curvature, so `c` and `d` decouple
//! skew and level from the curvature carried by `(rho, nu)`.
//!
//! The same family arises from a SABR variant in which the *squared*
//! volatility is lognormal. Writing `theta = a_t^2` with
//! `d theta = nu theta dW2` and substituting `Y_t = sqrt(theta) e^(nu^2 t/8)`
//! turns the dynamics into
//!
//! ```text
//!     dF = Y_t [(alpha + m)/alpha] F dW1,    dY = (nu/2) Y dW2,
//!     Y_0 = alpha,                           dW1 dW2 = rho dt,
//! ```
//!
//! a local-slope lognormal SABR whose implied smile coincides *exactly* with
//! the Hagan backbone at parameters `(alpha + m, rho, nu/2)` — see
//! [`SkewSdeParams::equivalent_hagan`]. Expanding that equivalence around the
//! original `(alpha, rho, nu)` with the exact shift increments of the
//! expansion coefficients yields closed-form predictions for the affine
//! parameters, [`theoretical_c_star`] and [`theoretical_d_star`]:
//!
//! ```text
//!     u = nu/2,  w = u - nu = -nu/2
//!     c* = rho w / 2 + [rho w / 2 I1(alpha, rho, u) + rho^2 u^2 m / 8
//!                        + rho nu / 2 dI1(alpha, rho, nu; w)] tau
//!     d* = m + [m I1(alpha + m, rho, u) + alpha rho u m / 4
//!                + alpha dI1(alpha, rho, nu; w)] tau
//! ```
//!
//! with `dI1(alpha, rho, nu; w) = I1(alpha, rho, nu + w) - I1(alpha, rho, nu)`
//! evaluated exactly by [`delta_i1`]. As `tau -> 0`, `c* -> -rho nu / 4` and
//! `d* -> m`.
//!
//! # References
//! - Hagan, P., Kumar, D., Lesniewski, A., Woodward, D. (2002),
//!   "Managing Smile Risk", Wilmott Magazine.

use serde::{Deserialize, Serialize};

use crate::black::ForwardContext;
use crate::error::{Result, VolfitError};
use crate::hagan::{i1_lognormal, sigma_hagan_beta1, SabrParams};

/// Parameters of the affine-corrected smile
/// `sigma = sigma_hagan_beta1(alpha, rho, nu) + c ln(K/f) + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewSabrParams {
    pub alpha: f64,
    pub rho: f64,
    pub nu: f64,
    pub c: f64,
    pub d: f64,
}

impl SkewSabrParams {
    pub fn new(alpha: f64, rho: f64, nu: f64, c: f64, d: f64) -> Result<Self> {
        SabrParams::lognormal(alpha, rho, nu)?;
        if !(c.is_finite() && d.is_finite()) {
            return Err(VolfitError::invalid(format!(
                "c and d must be finite, got c={c}, d={d}"
            )));
        }
        if alpha + d <= 0.0 {
            return Err(VolfitError::invalid(format!(
                "alpha + d must be positive for a positive ATM level, got {}",
                alpha + d
            )));
        }
        Ok(SkewSabrParams { alpha, rho, nu, c, d })
    }

    /// Implied volatility at `strike`; thin wrapper over [`sigma_skew`].
    pub fn vol(&self, ctx: &ForwardContext, strike: f64) -> Result<f64> {
        sigma_skew(self, ctx, strike)
    }
}

/// Parameters of the variance-lognormal SDE: spot vol `alpha`, correlation
/// `rho`, vol-of-variance `nu`, and local-slope offset `m` (the effective
/// diffusion coefficient is `Y_t (alpha + m)/alpha F`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewSdeParams {
    pub alpha: f64,
    pub rho: f64,
    pub nu: f64,
    pub m: f64,
}

impl SkewSdeParams {
    pub fn new(alpha: f64, rho: f64, nu: f64, m: f64) -> Result<Self> {
        SabrParams::lognormal(alpha, rho, nu)?;
        if !m.is_finite() {
            return Err(VolfitError::invalid(format!("m must be finite, got {m}")));
        }
        if alpha + m <= 0.0 {
            return Err(VolfitError::invalid(format!(
                "alpha + m must be positive, got {}",
                alpha + m
            )));
        }
        Ok(SkewSdeParams { alpha, rho, nu, m })
    }

    /// Slope factor `(alpha + m)/alpha` multiplying `F` in the diffusion.
    pub fn gamma(&self) -> f64 {
        (self.alpha + self.m) / self.alpha
    }

    /// The lognormal-SABR parameter set whose Hagan smile coincides exactly
    /// with this SDE's expansion: `(alpha + m, rho, nu/2)`.
    pub fn equivalent_hagan(&self) -> SabrParams {
        SabrParams {
            alpha: self.alpha + self.m,
            beta: 1.0,
            rho: self.rho,
            nu: 0.5 * self.nu,
        }
    }
}

/// Affine-corrected smile value. The formula is unbounded below, so extreme
/// `(c, d)` can drive the result non-positive; the value is returned
/// unclamped and callers treat a non-positive volatility as an invalid-quote
/// signal (the calibration objective penalises it).
pub fn sigma_skew(p: &SkewSabrParams, ctx: &ForwardContext, strike: f64) -> Result<f64> {
    let backbone = sigma_hagan_beta1(p.alpha, p.rho, p.nu, ctx, strike)?;
    if !(p.c.is_finite() && p.d.is_finite()) {
        return Err(VolfitError::invalid(format!(
            "c and d must be finite, got c={}, d={}",
            p.c, p.d
        )));
    }
    Ok(backbone + p.c * (strike / ctx.forward).ln() + p.d)
}

/// Exact increment of the first-order coefficient under a vol-of-vol shift:
/// `I1(alpha, rho, nu + w) - I1(alpha, rho, nu)
///  = rho w alpha / 4 + (2 - 3 rho^2)(2 nu w + w^2) / 24`.
pub fn delta_i1(alpha: f64, rho: f64, nu: f64, w: f64) -> f64 {
    0.25 * rho * w * alpha + (2.0 - 3.0 * rho * rho) * (2.0 * nu * w + w * w) / 24.0
}

/// Predicted slope parameter of the affine correction when the smile of the
/// variance-lognormal SDE is written over the backbone at the *original*
/// `(alpha, rho, nu)`. Affine in `tau`; tends to `-rho nu / 4` as `tau -> 0`.
pub fn theoretical_c_star(p: &SkewSdeParams, tau: f64) -> f64 {
    let u = 0.5 * p.nu;
    let w = u - p.nu;
    let leading = 0.5 * p.rho * w;
    let order_tau = leading * i1_lognormal(p.alpha, p.rho, u)
        + 0.125 * p.rho * p.rho * u * u * p.m
        + 0.5 * p.rho * p.nu * delta_i1(p.alpha, p.rho, p.nu, w);
    leading + order_tau * tau
}

/// Predicted level parameter of the affine correction; affine in `tau` and
/// tending to `m` as `tau -> 0`.
pub fn theoretical_d_star(p: &SkewSdeParams, tau: f64) -> f64 {
    let u = 0.5 * p.nu;
    let w = u - p.nu;
    let order_tau = p.m * i1_lognormal(p.alpha + p.m, p.rho, u)
        + 0.25 * p.alpha * p.rho * u * p.m
        + p.alpha * delta_i1(p.alpha, p.rho, p.nu, w);
    p.m + order_tau * tau
}
