//! Lognormal-SABR asymptotic implied volatility (Hagan expansion).
//!
//! The underlying dynamics on the forward `F` with stochastic volatility
//! `alpha_t` are
//!
//! ```text
//!     dF = alpha_t F^beta dW1,   d alpha_t = nu alpha_t dW2,
//!     dW1 dW2 = rho dt,          alpha_0 = alpha,
//! ```
//!
//! whose Black implied volatility admits the small-time expansion
//! `sigma = I0(K) (1 + I1(K) tau)`. For `beta = 1` the leading order is
//!
//! ```text
//!     I0 = alpha zeta / chi(zeta),        zeta = (nu/alpha) ln(f/K),
//!     chi(z) = ln[(sqrt(1 - 2 rho z + z^2) - rho + z) / (1 - rho)],
//!     I1 = rho nu alpha / 4 + (2 - 3 rho^2) nu^2 / 24,
//! ```
//!
//! and for general `beta` the same structure holds with the classic
//! `(fK)^((1-beta)/2)` midpoint factors and log-moneyness correction series
//! (implemented in [`sigma_hagan_full`]). At the money both reduce exactly to
//! `I0(f) (1 + I1 tau)` with `I0(f) = alpha / f^(1-beta)`.
//!
//! `zeta / chi(zeta)` has a removable singularity at `zeta = 0`; near zero it
//! is evaluated by its Taylor series
//! `1 - rho z / 2 + (2 - 3 rho^2) z^2 / 12 + O(z^3)`, which also furnishes the
//! quadratic near-the-money approximation exposed as [`i0_taylor`].
//!
//! # References
//! - Hagan, P., Kumar, D., Lesniewski, A., Woodward, D. (2002),
//!   "Managing Smile Risk", Wilmott Magazine.

use serde::{Deserialize, Serialize};

use crate::black::ForwardContext;
use crate::error::{Result, VolfitError};

/// Below this |zeta| the ratio `zeta/chi(zeta)` switches to its Taylor
/// series; the truncation error is O(zeta^3) ~ 1e-18 at the cutoff, far
/// inside the 1e-10 continuity budget of the switch.
const ZETA_SERIES_CUTOFF: f64 = 1e-6;

/// SABR parameter set. `beta = 1` selects the lognormal backbone used by the
/// rest of the crate; other `beta` values are priced via [`sigma_hagan_full`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SabrParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub nu: f64,
}

impl SabrParams {
    pub fn new(alpha: f64, beta: f64, rho: f64, nu: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(VolfitError::invalid(format!(
                "alpha must be finite and positive, got {alpha}"
            )));
        }
        if !(beta.is_finite() && (0.0..=1.0).contains(&beta)) {
            return Err(VolfitError::invalid(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        if !(rho.is_finite() && rho.abs() < 1.0) {
            return Err(VolfitError::invalid(format!(
                "rho must lie strictly inside (-1, 1), got {rho}"
            )));
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(VolfitError::invalid(format!(
                "nu must be finite and non-negative, got {nu}"
            )));
        }
        Ok(SabrParams { alpha, beta, rho, nu })
    }

    /// Lognormal (`beta = 1`) parameter set.
    pub fn lognormal(alpha: f64, rho: f64, nu: f64) -> Result<Self> {
        SabrParams::new(alpha, 1.0, rho, nu)
    }

    /// Implied volatility at `strike`, dispatching on `beta`.
    pub fn vol(&self, ctx: &ForwardContext, strike: f64) -> Result<f64> {
        if self.beta == 1.0 {
            sigma_hagan_beta1(self.alpha, self.rho, self.nu, ctx, strike)
        } else {
            sigma_hagan_full(self, ctx, strike)
        }
    }
}

/// Leading-order pieces of the expansion `sigma = i0 (1 + i1 tau)` for the
/// lognormal backbone, exposed for diagnostics and for the skew extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerms {
    pub i0: f64,
    pub i1: f64,
    pub zeta: f64,
}

/// The auxiliary function `chi(z) = ln[(sqrt(1 - 2 rho z + z^2) - rho + z)
/// / (1 - rho)]` of the expansion. Well defined for every real `z` when
/// `|rho| < 1`, with `chi(0) = 0`, `chi'(0) = 1`, `chi''(0) = rho`.
///
/// Evaluated as `ln_1p((sqrt(A) - 1 + z) / (1 - rho))` with the square root
/// rationalised, so small `|z|` keeps full relative accuracy instead of
/// losing half the mantissa to the `ln` of a value near 1.
pub fn chi(z: f64, rho: f64) -> f64 {
    let a = 1.0 - 2.0 * rho * z + z * z;
    let sqrt_a_minus_1 = (z * z - 2.0 * rho * z) / (1.0 + a.sqrt());
    ((sqrt_a_minus_1 + z) / (1.0 - rho)).ln_1p()
}

/// `z / chi(z)` with the removable singularity at zero filled by the series
/// `1 - rho z / 2 + (2 - 3 rho^2) z^2 / 12`.
pub fn z_over_chi(z: f64, rho: f64) -> f64 {
    if z.abs() < ZETA_SERIES_CUTOFF {
        1.0 - 0.5 * rho * z + (2.0 - 3.0 * rho * rho) / 12.0 * z * z
    } else {
        z / chi(z, rho)
    }
}

/// First-order coefficient `I1 = rho nu alpha / 4 + (2 - 3 rho^2) nu^2 / 24`
/// of the lognormal backbone; strike-independent.
pub fn i1_lognormal(alpha: f64, rho: f64, nu: f64) -> f64 {
    0.25 * rho * nu * alpha + (2.0 - 3.0 * rho * rho) * nu * nu / 24.0
}

fn validate_beta1_inputs(
    alpha: f64,
    rho: f64,
    nu: f64,
    ctx: &ForwardContext,
    strike: f64,
) -> Result<()> {
    SabrParams::new(alpha, 1.0, rho, nu)?;
    ForwardContext::new(ctx.forward, ctx.tau)?;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(VolfitError::invalid(format!(
            "strike must be finite and positive, got {strike}"
        )));
    }
    Ok(())
}

/// `I0`, `I1`, and `zeta` of the lognormal backbone at one strike.
pub fn expansion_terms(
    alpha: f64,
    rho: f64,
    nu: f64,
    ctx: &ForwardContext,
    strike: f64,
) -> Result<ExpansionTerms> {
    validate_beta1_inputs(alpha, rho, nu, ctx, strike)?;
    let zeta = (nu / alpha) * (ctx.forward / strike).ln();
    Ok(ExpansionTerms {
        i0: alpha * z_over_chi(zeta, rho),
        i1: i1_lognormal(alpha, rho, nu),
        zeta,
    })
}

/// Hagan implied volatility for the lognormal (`beta = 1`) backbone,
/// `sigma = I0 (1 + I1 tau)`. Exactly `alpha (1 + I1 tau)` at the money.
pub fn sigma_hagan_beta1(
    alpha: f64,
    rho: f64,
    nu: f64,
    ctx: &ForwardContext,
    strike: f64,
) -> Result<f64> {
    let terms = expansion_terms(alpha, rho, nu, ctx, strike)?;
    Ok(terms.i0 * (1.0 + terms.i1 * ctx.tau))
}

/// Full Hagan implied volatility for general `beta` in `[0, 1]`:
///
/// ```text
///     sigma = alpha / [(fK)^((1-b)/2) S]  *  zeta/chi(zeta)  *  (1 + I1 tau)
///     S     = 1 + (1-b)^2/24 L^2 + (1-b)^4/1920 L^4,      L = ln(f/K)
///     zeta  = (nu/alpha) (fK)^((1-b)/2) L S
///     I1    = (1-b)^2 alpha^2 / (24 (fK)^(1-b))
///           + rho beta nu alpha / (4 (fK)^((1-b)/2))
///           + (2 - 3 rho^2) nu^2 / 24
/// ```
///
/// where `zeta` carries the same log-moneyness series `S` as the denominator
/// (the truncated exact integral `Int_K^f dx / x^beta`). At `beta = 1` every
/// correction collapses and the value coincides with [`sigma_hagan_beta1`].
pub fn sigma_hagan_full(p: &SabrParams, ctx: &ForwardContext, strike: f64) -> Result<f64> {
    SabrParams::new(p.alpha, p.beta, p.rho, p.nu)?;
    ForwardContext::new(ctx.forward, ctx.tau)?;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(VolfitError::invalid(format!(
            "strike must be finite and positive, got {strike}"
        )));
    }
    let omb = 1.0 - p.beta;
    let f = ctx.forward;
    let l = (f / strike).ln();
    let l2 = l * l;
    let fk = f * strike;
    let fk_mid = fk.powf(0.5 * omb);
    let series = 1.0 + omb * omb / 24.0 * l2 + omb.powi(4) / 1920.0 * l2 * l2;
    let zeta = (p.nu / p.alpha) * fk_mid * l * series;
    let i1 = omb * omb * p.alpha * p.alpha / (24.0 * fk.powf(omb))
        + 0.25 * p.rho * p.beta * p.nu * p.alpha / fk_mid
        + (2.0 - 3.0 * p.rho * p.rho) * p.nu * p.nu / 24.0;
    Ok(p.alpha / (fk_mid * series) * z_over_chi(zeta, p.rho) * (1.0 + i1 * ctx.tau))
}

/// Quadratic near-the-money expansion of the leading order `I0`:
///
/// ```text
///     I0 ~= alpha + rho nu / 2 ln(K/f) + (1/6 - rho^2/4) nu^2/alpha ln^2(K/f)
/// ```
///
/// The residual against the exact `I0` decays with the third power of
/// `ln(K/f)`.
pub fn i0_taylor(alpha: f64, rho: f64, nu: f64, ctx: &ForwardContext, strike: f64) -> Result<f64> {
    validate_beta1_inputs(alpha, rho, nu, ctx, strike)?;
    let lkf = (strike / ctx.forward).ln();
    Ok(alpha
        + 0.5 * rho * nu * lkf
        + (1.0 / 6.0 - 0.25 * rho * rho) * (nu * nu / alpha) * lkf * lkf)
}
