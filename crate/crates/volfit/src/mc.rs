//! Monte Carlo simulation of the smile dynamics.
//!
//! Serves as the numerical oracle against which the closed-form expansions
//! are checked: terminal forwards are simulated under one of the supported
//! [`Dynamics`], option prices estimated pathwise, and implied vols backed
//! out through the Black-76 inverter.
//!
//! Reproducibility is absolute: every antithetic pair (or single path) owns
//! a dedicated ChaCha8 stream derived from the seed and the pair index, so
//! the simulated sample is bit-identical regardless of how many Rayon
//! workers execute it, and estimates are reduced sequentially in path order.
//!
//! Discretisation: stochastic factors evolve exactly in log space (they are
//! geometric Brownian motions), and the forward takes a log-Euler step with
//! the vol frozen at the step start, which keeps it an exact per-step
//! martingale. The general-beta dynamics use an arithmetic Euler step with
//! absorption at zero, the standard treatment for CEV-type backbones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::black::{black_vega, implied_vol, ForwardContext, OptionKind};
use crate::error::{Result, VolfitError};
use crate::hagan::SabrParams;
use crate::skew::SkewSdeParams;

/// Simulated dynamics of the forward and its volatility factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dynamics {
    /// Lognormal-backbone dynamics: `dF = a F dW1`, `da = nu a dW2`,
    /// `d<W1,W2> = rho dt`. Requires `beta = 1`.
    HaganLognormal(SabrParams),
    /// General backbone `dF = a F^beta dW1` with absorption at zero.
    HaganGeneralBeta(SabrParams),
    /// Variance dynamics with a local slope: `dF = gamma Y F dW1` where
    /// `Y` is the compensated square root of the lognormal variance factor,
    /// a driftless geometric Brownian motion with volatility `nu / 2`
    /// started at `alpha`, and `gamma = (alpha + m) / alpha`.
    SkewVariance(SkewSdeParams),
}

impl Dynamics {
    fn validate(&self) -> Result<()> {
        match self {
            Dynamics::HaganLognormal(p) => {
                SabrParams::new(p.alpha, p.beta, p.rho, p.nu)?;
                if p.beta != 1.0 {
                    return Err(VolfitError::invalid(format!(
                        "lognormal dynamics require beta = 1, got {}",
                        p.beta
                    )));
                }
                Ok(())
            }
            Dynamics::HaganGeneralBeta(p) => {
                SabrParams::new(p.alpha, p.beta, p.rho, p.nu).map(|_| ())
            }
            Dynamics::SkewVariance(p) => {
                SkewSdeParams::new(p.alpha, p.rho, p.nu, p.m).map(|_| ())
            }
        }
    }
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Number of terminal samples (must be even with antithetic pairing).
    pub n_paths: usize,
    /// Time steps per path.
    pub n_steps: usize,
    /// Base seed; pair `i` draws from ChaCha stream `i + 1` of this seed.
    pub seed: u64,
    /// Antithetic pairing: consecutive samples use mirrored normals.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 1 << 18,
            n_steps: 128,
            seed: 42,
            antithetic: true,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(VolfitError::invalid("n_paths must be positive".to_string()));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(VolfitError::invalid(format!(
                "antithetic pairing needs an even path count, got {}",
                self.n_paths
            )));
        }
        if self.n_steps == 0 {
            return Err(VolfitError::invalid("n_steps must be positive".to_string()));
        }
        Ok(())
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Independent samples behind the estimate (pairs count once).
    pub n_samples: usize,
}

/// Implied-vol estimate for one strike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McImpliedVol {
    pub strike: f64,
    pub kind: OptionKind,
    pub price: f64,
    pub price_std_error: f64,
    pub iv: f64,
    /// Delta-method standard error: price standard error over Black vega.
    pub iv_std_error: f64,
}

/// One path of the chosen dynamics; `sign = -1` replays the same normal
/// draws mirrored, which is what antithetic pairing requires.
fn run_path(
    dynamics: &Dynamics,
    ctx: &ForwardContext,
    n_steps: usize,
    rng: &mut ChaCha8Rng,
    sign: f64,
) -> f64 {
    let dt = ctx.tau / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    match dynamics {
        Dynamics::HaganLognormal(p) => {
            let rho_bar = (1.0 - p.rho * p.rho).sqrt();
            let mut ln_f = ctx.forward.ln();
            let mut a = p.alpha;
            for _ in 0..n_steps {
                let z1 = sign * rng.sample::<f64, _>(StandardNormal);
                let z2 = sign * rng.sample::<f64, _>(StandardNormal);
                let zv = p.rho * z1 + rho_bar * z2;
                ln_f += -0.5 * a * a * dt + a * sqrt_dt * z1;
                a *= (-0.5 * p.nu * p.nu * dt + p.nu * sqrt_dt * zv).exp();
            }
            ln_f.exp()
        }
        Dynamics::HaganGeneralBeta(p) => {
            let rho_bar = (1.0 - p.rho * p.rho).sqrt();
            let mut f = ctx.forward;
            let mut a = p.alpha;
            for _ in 0..n_steps {
                let z1 = sign * rng.sample::<f64, _>(StandardNormal);
                let z2 = sign * rng.sample::<f64, _>(StandardNormal);
                let zv = p.rho * z1 + rho_bar * z2;
                if f > 0.0 {
                    f += a * f.powf(p.beta) * sqrt_dt * z1;
                    if f <= 0.0 {
                        f = 0.0;
                    }
                }
                a *= (-0.5 * p.nu * p.nu * dt + p.nu * sqrt_dt * zv).exp();
            }
            f
        }
        Dynamics::SkewVariance(p) => {
            let rho_bar = (1.0 - p.rho * p.rho).sqrt();
            let gamma = p.gamma();
            let half_nu = 0.5 * p.nu;
            let mut ln_f = ctx.forward.ln();
            let mut y = p.alpha;
            for _ in 0..n_steps {
                let z1 = sign * rng.sample::<f64, _>(StandardNormal);
                let z2 = sign * rng.sample::<f64, _>(StandardNormal);
                let zv = p.rho * z1 + rho_bar * z2;
                let sigma = gamma * y;
                ln_f += -0.5 * sigma * sigma * dt + sigma * sqrt_dt * z1;
                y *= (-0.5 * half_nu * half_nu * dt + half_nu * sqrt_dt * zv).exp();
            }
            ln_f.exp()
        }
    }
}

/// Simulates terminal forwards.
///
/// With antithetic pairing the output interleaves each pair: indices
/// `2i` / `2i + 1` hold the base and mirrored path of pair `i`. Rayon
/// parallelises over pairs, but each pair's RNG stream depends only on the
/// seed and the pair index, so the result is independent of the thread
/// count.
pub fn simulate_terminal(
    dynamics: &Dynamics,
    ctx: &ForwardContext,
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    dynamics.validate()?;
    ForwardContext::new(ctx.forward, ctx.tau)?;
    cfg.validate()?;

    if cfg.antithetic {
        let n_pairs = cfg.n_paths / 2;
        let pairs: Vec<[f64; 2]> = (0..n_pairs)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64 + 1);
                let mut mirror = rng.clone();
                [
                    run_path(dynamics, ctx, cfg.n_steps, &mut rng, 1.0),
                    run_path(dynamics, ctx, cfg.n_steps, &mut mirror, -1.0),
                ]
            })
            .collect();
        Ok(pairs.into_iter().flatten().collect())
    } else {
        Ok((0..cfg.n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64 + 1);
                run_path(dynamics, ctx, cfg.n_steps, &mut rng, 1.0)
            })
            .collect())
    }
}

/// Sequential mean and standard error of the per-sample payoffs. With
/// antithetic samples the estimator averages each mirrored pair first, so
/// the standard error correctly reflects the pairing.
pub fn price_from_terminals(
    terminals: &[f64],
    antithetic: bool,
    strike: f64,
    kind: OptionKind,
) -> McEstimate {
    let samples: Vec<f64> = if antithetic {
        terminals
            .chunks_exact(2)
            .map(|pair| 0.5 * (kind.intrinsic(pair[0], strike) + kind.intrinsic(pair[1], strike)))
            .collect()
    } else {
        terminals
            .iter()
            .map(|&f| kind.intrinsic(f, strike))
            .collect()
    };
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss = samples.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
    let variance = ss / (n - 1).max(1) as f64;
    McEstimate {
        value: mean,
        std_error: (variance / n as f64).sqrt(),
        n_samples: n,
    }
}

/// Prices one option under the dynamics.
pub fn price_option(
    dynamics: &Dynamics,
    ctx: &ForwardContext,
    strike: f64,
    kind: OptionKind,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let terminals = simulate_terminal(dynamics, ctx, cfg)?;
    Ok(price_from_terminals(&terminals, cfg.antithetic, strike, kind))
}

fn invert_estimate(
    ctx: &ForwardContext,
    strike: f64,
    kind: OptionKind,
    estimate: McEstimate,
) -> Result<McImpliedVol> {
    let iv = implied_vol(ctx, strike, estimate.value, kind)?;
    let vega = black_vega(ctx, strike, iv)?;
    Ok(McImpliedVol {
        strike,
        kind,
        price: estimate.value,
        price_std_error: estimate.std_error,
        iv,
        iv_std_error: estimate.std_error / vega,
    })
}

/// Simulated implied volatility at one strike (out-of-the-money side).
pub fn mc_implied_vol(
    dynamics: &Dynamics,
    ctx: &ForwardContext,
    strike: f64,
    cfg: &McConfig,
) -> Result<McImpliedVol> {
    let kind = otm_kind(ctx, strike);
    let estimate = price_option(dynamics, ctx, strike, kind, cfg)?;
    invert_estimate(ctx, strike, kind, estimate)
}

/// Simulated implied-vol smile over a strike grid: one simulation shared by
/// every strike (common random numbers), priced on the out-of-the-money
/// side of each.
pub fn mc_smile(
    dynamics: &Dynamics,
    ctx: &ForwardContext,
    strikes: &[f64],
    cfg: &McConfig,
) -> Result<Vec<McImpliedVol>> {
    let terminals = simulate_terminal(dynamics, ctx, cfg)?;
    strikes
        .iter()
        .map(|&strike| {
            if !(strike.is_finite() && strike > 0.0) {
                return Err(VolfitError::invalid(format!(
                    "strike must be finite and positive, got {strike}"
                )));
            }
            let kind = otm_kind(ctx, strike);
            let estimate = price_from_terminals(&terminals, cfg.antithetic, strike, kind);
            invert_estimate(ctx, strike, kind, estimate)
        })
        .collect()
}

fn otm_kind(ctx: &ForwardContext, strike: f64) -> OptionKind {
    if strike < ctx.forward {
        OptionKind::Put
    } else {
        OptionKind::Call
    }
}
