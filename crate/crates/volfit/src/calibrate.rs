//! Weighted least-squares smile calibration.
//!
//! A [`Smile`] bundles one expiry's quotes (strike, implied vol, weight) with
//! its [`ForwardContext`]; [`fit`] calibrates any [`ModelKind`] to it. Linear
//! models (polynomial, spline) solve their least-squares problem exactly;
//! the nonlinear ones (Hagan, skew, SVI) minimise the weighted objective
//!
//! ```text
//!     J(theta) = sum_i w_i (sigma_model(K_i) - sigma_mkt(K_i))^2
//!              + penalty * sum_i min(sigma_model(K_i), 0)^2
//! ```
//!
//! with a deterministic multi-start Nelder-Mead driver. Start points are a
//! fixed sequence: an ATM-informed heuristic, a model-specific canonical
//! start, then Halton low-discrepancy points with a small seeded jitter.
//! The sequence is prefix-stable, so raising `n_starts` can only improve
//! (never change for the worse) the reported optimum, and two runs with the
//! same configuration are bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::black::ForwardContext;
use crate::error::{Result, VolfitError};
use crate::hagan::SabrParams;
use crate::optim::nelder_mead_bounded;
use crate::poly::{self, PolyParams};
use crate::skew::SkewSabrParams;
use crate::spline::{fit_spline, SplineModel};
use crate::svi::SviParams;

/// Minimum quote count accepted by [`Smile::new`] (five-parameter models
/// need at least one residual degree of freedom).
pub const MIN_SMILE_POINTS: usize = 6;

/// The smile models known to the calibration and benchmark layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hagan,
    Skew,
    Svi,
    Poly,
    Spline,
}

impl ModelKind {
    /// Every model, in the canonical reporting order.
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Hagan,
        ModelKind::Skew,
        ModelKind::Svi,
        ModelKind::Poly,
        ModelKind::Spline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Hagan => "hagan",
            ModelKind::Skew => "skew",
            ModelKind::Svi => "svi",
            ModelKind::Poly => "poly",
            ModelKind::Spline => "spline",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = VolfitError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hagan" => Ok(ModelKind::Hagan),
            "skew" => Ok(ModelKind::Skew),
            "svi" => Ok(ModelKind::Svi),
            "poly" => Ok(ModelKind::Poly),
            "spline" => Ok(ModelKind::Spline),
            other => Err(VolfitError::invalid(format!(
                "unknown model {other:?}; expected hagan, skew, svi, poly, or spline"
            ))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One market quote: strike, implied vol, and its least-squares weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub iv: f64,
    pub weight: f64,
}

/// A validated single-expiry volatility smile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smile {
    ctx: ForwardContext,
    points: Vec<SmilePoint>,
}

impl Smile {
    /// Validates and stores the quotes: at least [`MIN_SMILE_POINTS`] of
    /// them, strictly increasing positive strikes, positive finite vols,
    /// finite non-negative weights with at least one strictly positive.
    pub fn new(ctx: ForwardContext, points: Vec<SmilePoint>) -> Result<Self> {
        ForwardContext::new(ctx.forward, ctx.tau)?;
        if points.len() < MIN_SMILE_POINTS {
            return Err(VolfitError::invalid(format!(
                "smile needs at least {MIN_SMILE_POINTS} quotes, got {}",
                points.len()
            )));
        }
        for p in &points {
            if !(p.strike.is_finite() && p.strike > 0.0) {
                return Err(VolfitError::invalid(format!(
                    "strike must be finite and positive, got {}",
                    p.strike
                )));
            }
            if !(p.iv.is_finite() && p.iv > 0.0) {
                return Err(VolfitError::invalid(format!(
                    "implied vol must be finite and positive, got {} at strike {}",
                    p.iv, p.strike
                )));
            }
            if !(p.weight.is_finite() && p.weight >= 0.0) {
                return Err(VolfitError::invalid(format!(
                    "weight must be finite and non-negative, got {} at strike {}",
                    p.weight, p.strike
                )));
            }
        }
        for w in points.windows(2) {
            if w[1].strike <= w[0].strike {
                return Err(VolfitError::invalid(format!(
                    "strikes must be strictly increasing, got {} then {}",
                    w[0].strike, w[1].strike
                )));
            }
        }
        if !points.iter().any(|p| p.weight > 0.0) {
            return Err(VolfitError::invalid(
                "all quote weights are zero".to_string(),
            ));
        }
        Ok(Smile { ctx, points })
    }

    /// Builds a smile from parallel strike/vol slices with the standard
    /// moneyness weights of [`strike_weight`].
    pub fn from_vols(ctx: ForwardContext, strikes: &[f64], ivs: &[f64]) -> Result<Self> {
        if strikes.len() != ivs.len() {
            return Err(VolfitError::invalid(format!(
                "strike and iv lengths differ: {} vs {}",
                strikes.len(),
                ivs.len()
            )));
        }
        let points = strikes
            .iter()
            .zip(ivs)
            .map(|(&strike, &iv)| SmilePoint {
                strike,
                iv,
                weight: strike_weight(ctx.forward, strike),
            })
            .collect();
        Smile::new(ctx, points)
    }

    pub fn ctx(&self) -> &ForwardContext {
        &self.ctx
    }

    pub fn points(&self) -> &[SmilePoint] {
        &self.points
    }

    pub fn strikes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.strike).collect()
    }

    pub fn ivs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.iv).collect()
    }
}

/// Default calibration weight: a Gaussian bump in relative moneyness,
/// `exp(-((K - f) / (0.1 f))^2 / 4)`, worth 1 at the money and
/// `exp(-1/4) ~= 0.779` at 10% moneyness. Quotes far from the forward still
/// count, just less than the liquid centre of the book.
pub fn strike_weight(forward: f64, strike: f64) -> f64 {
    let t = (strike - forward) / (0.1 * forward);
    (-0.25 * t * t).exp()
}

/// Calibration settings. `Default` gives the standard production fit; tests
/// and the benchmark harness tighten `tolerance` / raise `n_starts` when
/// they need optima at close to full double precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Per-start Nelder-Mead iteration budget (shared across its restarts).
    pub max_iterations: u64,
    /// Relative function-spread convergence tolerance.
    pub tolerance: f64,
    /// Number of start points; the sequence is prefix-stable in this value.
    pub n_starts: usize,
    /// Optional parameter box overriding [`default_bounds`].
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Scale on the negative-volatility hinge penalty.
    pub penalty_scale: f64,
    /// Seed for the jittered Halton starts.
    pub seed: u64,
    /// Calibrate the Hagan exponent `beta` as a fourth parameter instead of
    /// pinning it to 1 (lognormal). Only meaningful for [`ModelKind::Hagan`].
    pub free_beta: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 2000,
            tolerance: 1e-12,
            n_starts: 8,
            bounds: None,
            penalty_scale: 1e4,
            seed: 42,
            free_beta: false,
        }
    }
}

/// Standard parameter boxes. Empty for the linear models, whose fits are
/// exact and unconstrained.
pub fn default_bounds(kind: ModelKind, free_beta: bool) -> Vec<(f64, f64)> {
    match kind {
        ModelKind::Hagan => {
            let mut b = vec![(1e-4, 5.0), (-0.999, 0.999), (1e-4, 10.0)];
            if free_beta {
                b.push((0.0, 1.0));
            }
            b
        }
        ModelKind::Skew => vec![
            (1e-4, 5.0),
            (-0.999, 0.999),
            (1e-4, 10.0),
            (-5.0, 5.0),
            (-2.0, 2.0),
        ],
        ModelKind::Svi => vec![
            (1e-8, 1.0),
            (1e-4, 10.0),
            (-1.0, 1.0),
            (-2.0, 2.0),
            (1e-4, 5.0),
        ],
        ModelKind::Poly | ModelKind::Spline => Vec::new(),
    }
}

/// A calibrated model of any kind, evaluable at arbitrary strikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedParams {
    Hagan(SabrParams),
    Skew(SkewSabrParams),
    Svi(SviParams),
    Poly(PolyParams),
    Spline(SplineModel),
}

impl FittedParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedParams::Hagan(_) => ModelKind::Hagan,
            FittedParams::Skew(_) => ModelKind::Skew,
            FittedParams::Svi(_) => ModelKind::Svi,
            FittedParams::Poly(_) => ModelKind::Poly,
            FittedParams::Spline(_) => ModelKind::Spline,
        }
    }

    /// Model implied volatility at `strike`.
    pub fn vol(&self, ctx: &ForwardContext, strike: f64) -> Result<f64> {
        match self {
            FittedParams::Hagan(p) => p.vol(ctx, strike),
            FittedParams::Skew(p) => p.vol(ctx, strike),
            FittedParams::Svi(p) => p.vol(ctx, strike),
            FittedParams::Poly(p) => p.vol(ctx, strike),
            FittedParams::Spline(m) => Ok(m.vol(strike)),
        }
    }

    /// Signed model value for the least-squares objective: identical to
    /// [`FittedParams::vol`] where that succeeds, but SVI total variance is
    /// mapped through a signed square root instead of erroring so the hinge
    /// penalty can see how far negative the model went.
    fn raw_vol(&self, ctx: &ForwardContext, strike: f64) -> Option<f64> {
        match self {
            FittedParams::Hagan(p) => p.vol(ctx, strike).ok(),
            FittedParams::Skew(p) => p.vol(ctx, strike).ok(),
            FittedParams::Svi(p) => {
                let w = p.total_variance(ctx.log_moneyness(strike));
                Some(w.signum() * (w.abs() / ctx.tau).sqrt())
            }
            FittedParams::Poly(p) => p.vol(ctx, strike).ok(),
            FittedParams::Spline(m) => Some(m.vol(strike)),
        }
    }
}

/// Weighted least-squares objective with a hinge penalty on negative model
/// volatilities. Non-finite model values score `1e100` so the optimiser
/// treats them as off-limits rather than crashing.
pub fn objective(params: &FittedParams, smile: &Smile, penalty_scale: f64) -> f64 {
    let ctx = smile.ctx();
    let mut total = 0.0;
    for p in smile.points() {
        let model = match params.raw_vol(ctx, p.strike) {
            Some(v) if v.is_finite() => v,
            _ => return 1e100,
        };
        let diff = model - p.iv;
        total += p.weight * diff * diff;
        if model < 0.0 {
            total += penalty_scale * model * model;
        }
    }
    if total.is_finite() {
        total
    } else {
        1e100
    }
}

/// Unweighted root-mean-square error of the model against the smile quotes,
/// the common yardstick across models and the benchmark harness.
pub fn rmse(params: &FittedParams, smile: &Smile) -> f64 {
    let ctx = smile.ctx();
    let mut total = 0.0;
    for p in smile.points() {
        let model = match params.raw_vol(ctx, p.strike) {
            Some(v) if v.is_finite() => v,
            _ => return f64::INFINITY,
        };
        let diff = model - p.iv;
        total += diff * diff;
    }
    (total / smile.points().len() as f64).sqrt()
}

/// Outcome of a calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FittedParams,
    /// Weighted penalised objective at the optimum.
    pub objective: f64,
    /// Unweighted RMSE at the optimum.
    pub rmse: f64,
    /// Convergence flag of the run that produced the optimum (`true` for
    /// the exactly-solved linear models).
    pub converged: bool,
    /// Total objective evaluations across all starts (0 for linear models).
    pub n_evals: u64,
    /// Index of the start point that won.
    pub start_index: usize,
}

fn n_params(kind: ModelKind, free_beta: bool) -> usize {
    match kind {
        ModelKind::Hagan => {
            if free_beta {
                4
            } else {
                3
            }
        }
        ModelKind::Skew | ModelKind::Svi | ModelKind::Poly | ModelKind::Spline => 5,
    }
}

fn params_from_x(kind: ModelKind, x: &[f64], free_beta: bool) -> Option<FittedParams> {
    match kind {
        ModelKind::Hagan => {
            let beta = if free_beta { x[3] } else { 1.0 };
            SabrParams::new(x[0], beta, x[1], x[2])
                .ok()
                .map(FittedParams::Hagan)
        }
        ModelKind::Skew => SkewSabrParams::new(x[0], x[1], x[2], x[3], x[4])
            .ok()
            .map(FittedParams::Skew),
        ModelKind::Svi => SviParams::new(x[0], x[1], x[2], x[3], x[4])
            .ok()
            .map(FittedParams::Svi),
        ModelKind::Poly | ModelKind::Spline => None,
    }
}

/// Radical-inverse Halton value, `index >= 1`.
fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const HALTON_BASES: [u64; 5] = [2, 3, 5, 7, 11];

/// Maps a unit-interval coordinate into a bound interval, geometrically when
/// the interval is strictly positive (scale parameters span decades).
fn map_unit(u: f64, lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        lo * (hi / lo).powf(u)
    } else {
        lo + u * (hi - lo)
    }
}

/// The deterministic start sequence for the nonlinear models. Index 0 is an
/// ATM-informed heuristic, index 1 a canonical alternative (for the skew
/// model, the best three-parameter Hagan fit with `c = d = 0`, which makes
/// the skew optimum provably no worse than the Hagan one under default
/// bounds), and indices 2+ are jittered Halton points spanning the box.
fn start_points(
    kind: ModelKind,
    smile: &Smile,
    cfg: &FitConfig,
    bounds: &[(f64, f64)],
) -> Result<Vec<Vec<f64>>> {
    let ctx = smile.ctx();
    let pts = smile.points();
    let dim = bounds.len();

    // Quote summary statistics used by the heuristics.
    let atm_iv = pts
        .iter()
        .min_by(|a, b| {
            let da = (a.strike - ctx.forward).abs();
            let db = (b.strike - ctx.forward).abs();
            da.partial_cmp(&db).unwrap()
        })
        .map(|p| p.iv)
        .unwrap();
    let k_first = ctx.log_moneyness(pts[0].strike);
    let k_last = ctx.log_moneyness(pts[pts.len() - 1].strike);
    let slope = (pts[pts.len() - 1].iv - pts[0].iv) / (k_last - k_first);

    let clamp_into = |mut x: Vec<f64>| -> Vec<f64> {
        for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = xi.clamp(lo, hi);
        }
        x
    };

    let heuristic = match kind {
        ModelKind::Hagan => {
            let mut x = vec![atm_iv, 0.5 * slope.signum(), 1.0];
            if cfg.free_beta {
                x.push(1.0);
            }
            x
        }
        ModelKind::Skew => vec![atm_iv, 0.5 * slope.signum(), 1.0, 0.0, 0.0],
        ModelKind::Svi => svi_heuristic_start(smile),
        ModelKind::Poly | ModelKind::Spline => unreachable!("linear models have no starts"),
    };

    let canonical = match kind {
        ModelKind::Hagan => {
            let mut x = vec![atm_iv, 0.0, 0.5];
            if cfg.free_beta {
                x.push(0.5);
            }
            x
        }
        ModelKind::Skew => {
            // Warm start at the Hagan optimum under the same configuration
            // (modulo the skew-only bound box): with c = d = 0 the skew
            // objective equals the Hagan objective there, and Nelder-Mead
            // never returns a value above its start point.
            let nested = FitConfig {
                bounds: None,
                free_beta: false,
                ..cfg.clone()
            };
            match fit(ModelKind::Hagan, smile, &nested)? {
                FitResult {
                    params: FittedParams::Hagan(p),
                    ..
                } => vec![p.alpha, p.rho, p.nu, 0.0, 0.0],
                _ => unreachable!("hagan fit returns hagan params"),
            }
        }
        ModelKind::Svi => {
            let w_min = pts
                .iter()
                .map(|p| p.iv * p.iv * ctx.tau)
                .fold(f64::INFINITY, f64::min);
            vec![0.8 * w_min, 0.1, 0.0, 0.0, 1.0]
        }
        ModelKind::Poly | ModelKind::Spline => unreachable!("linear models have no starts"),
    };

    let mut starts = Vec::with_capacity(cfg.n_starts);
    starts.push(clamp_into(heuristic));
    if cfg.n_starts > 1 {
        starts.push(clamp_into(canonical));
    }
    for j in 2..cfg.n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed
                .wrapping_add((j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let mut x = Vec::with_capacity(dim);
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            let u = halton(j as u64 - 1, HALTON_BASES[d % HALTON_BASES.len()]);
            let u = (u + rng.gen_range(-0.05..0.05)).clamp(1e-3, 1.0 - 1e-3);
            x.push(map_unit(u, lo, hi));
        }
        starts.push(x);
    }
    Ok(starts)
}

/// ATM-informed SVI start: variance floor from the lowest quote, `m` at the
/// smile minimum, `b`/`rho` from the wing slopes of total variance.
fn svi_heuristic_start(smile: &Smile) -> Vec<f64> {
    let ctx = smile.ctx();
    let pts = smile.points();
    let k: Vec<f64> = pts.iter().map(|p| ctx.log_moneyness(p.strike)).collect();
    let w: Vec<f64> = pts.iter().map(|p| p.iv * p.iv * ctx.tau).collect();
    let i_min = (0..w.len())
        .min_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap())
        .unwrap();
    let a0 = 0.8 * w[i_min];
    let m0 = k[i_min];
    let sigma0 = ((k[k.len() - 1] - k[0]) / 4.0).max(1e-3);
    let (mut b0, mut rho0) = (0.5, 0.0);
    if i_min > 0 && i_min < w.len() - 1 {
        let s_left = (w[0] - w[i_min]) / (k[0] - k[i_min]);
        let s_right = (w[w.len() - 1] - w[i_min]) / (k[k.len() - 1] - k[i_min]);
        let b = 0.5 * (s_right - s_left);
        if b > 1e-6 {
            b0 = b;
            rho0 = ((s_right + s_left) / (2.0 * b)).clamp(-0.95, 0.95);
        }
    }
    vec![a0, b0, rho0, m0, sigma0]
}

fn validate_config(cfg: &FitConfig) -> Result<()> {
    if cfg.max_iterations == 0 {
        return Err(VolfitError::invalid("max_iterations must be positive".to_string()));
    }
    if !(cfg.tolerance.is_finite() && cfg.tolerance > 0.0) {
        return Err(VolfitError::invalid(format!(
            "tolerance must be finite and positive, got {}",
            cfg.tolerance
        )));
    }
    if cfg.n_starts == 0 {
        return Err(VolfitError::invalid("n_starts must be positive".to_string()));
    }
    if !(cfg.penalty_scale.is_finite() && cfg.penalty_scale >= 0.0) {
        return Err(VolfitError::invalid(format!(
            "penalty_scale must be finite and non-negative, got {}",
            cfg.penalty_scale
        )));
    }
    Ok(())
}

/// Calibrates `kind` to the smile.
///
/// Polynomial and spline models are solved exactly (the polynomial under the
/// smile weights, the spline with the equal weights of its own fitter, as
/// interpolation benchmarks conventionally are); the reported `objective`
/// always uses the smile weights so models stay comparable. The nonlinear
/// models run `cfg.n_starts` Nelder-Mead starts sequentially and keep the
/// strictly best outcome, which (with everything seeded) makes the whole fit
/// deterministic.
pub fn fit(kind: ModelKind, smile: &Smile, cfg: &FitConfig) -> Result<FitResult> {
    validate_config(cfg)?;
    match kind {
        ModelKind::Poly => {
            let params = FittedParams::Poly(fit_poly_exact(smile)?);
            Ok(FitResult {
                objective: objective(&params, smile, cfg.penalty_scale),
                rmse: rmse(&params, smile),
                params,
                converged: true,
                n_evals: 0,
                start_index: 0,
            })
        }
        ModelKind::Spline => {
            let model = fit_spline(&smile.strikes(), &smile.ivs(), smile.ctx().forward)?;
            let params = FittedParams::Spline(model);
            Ok(FitResult {
                objective: objective(&params, smile, cfg.penalty_scale),
                rmse: rmse(&params, smile),
                params,
                converged: true,
                n_evals: 0,
                start_index: 0,
            })
        }
        ModelKind::Hagan | ModelKind::Skew | ModelKind::Svi => fit_simplex(kind, smile, cfg),
    }
}

fn fit_simplex(kind: ModelKind, smile: &Smile, cfg: &FitConfig) -> Result<FitResult> {
    let dim = n_params(kind, cfg.free_beta);
    let bounds = match &cfg.bounds {
        Some(b) => {
            if b.len() != dim {
                return Err(VolfitError::invalid(format!(
                    "{kind} expects {dim} bounds, got {}",
                    b.len()
                )));
            }
            for &(lo, hi) in b {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(VolfitError::invalid(format!(
                        "invalid bound ({lo}, {hi})"
                    )));
                }
            }
            b.clone()
        }
        None => default_bounds(kind, cfg.free_beta),
    };

    let starts = start_points(kind, smile, cfg, &bounds)?;
    let mut objective_fn = |x: &[f64]| -> f64 {
        match params_from_x(kind, x, cfg.free_beta) {
            Some(params) => objective(&params, smile, cfg.penalty_scale),
            None => 1e100,
        }
    };

    let mut best: Option<(Vec<f64>, f64, bool, usize)> = None;
    let mut total_evals = 0u64;
    for (j, start) in starts.iter().enumerate() {
        let out = nelder_mead_bounded(
            &mut objective_fn,
            start,
            &bounds,
            cfg.max_iterations,
            cfg.tolerance,
        );
        total_evals += out.evals;
        let better = match &best {
            None => true,
            Some((_, value, _, _)) => out.value < *value,
        };
        if better {
            best = Some((out.x, out.value, out.converged, j));
        }
    }
    let (x, value, converged, start_index) = best.unwrap();
    let params = params_from_x(kind, &x, cfg.free_beta).ok_or_else(|| {
        VolfitError::non_convergence(format!(
            "{kind} calibration ended outside the valid parameter set at {x:?}"
        ))
    })?;
    Ok(FitResult {
        rmse: rmse(&params, smile),
        objective: value,
        params,
        converged,
        n_evals: total_evals,
        start_index,
    })
}

/// Exact weighted linear least squares for the quartic smile, solved by SVD
/// on the root-weighted Vandermonde design.
fn fit_poly_exact(smile: &Smile) -> Result<PolyParams> {
    use nalgebra::{DMatrix, DVector};
    let ctx = smile.ctx();
    let pts = smile.points();
    let mut design = DMatrix::zeros(pts.len(), poly::N_COEFFS);
    let mut rhs = DVector::zeros(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let k = ctx.log_moneyness(p.strike);
        let sw = p.weight.sqrt();
        let mut monomial = 1.0;
        for j in 0..poly::N_COEFFS {
            design[(i, j)] = sw * monomial;
            monomial *= k;
        }
        rhs[i] = sw * p.iv;
    }
    let svd = design.svd(true, true);
    let rank_eps = 1e-12 * svd.singular_values.max();
    if svd
        .singular_values
        .iter()
        .filter(|&&s| s > rank_eps)
        .count()
        < poly::N_COEFFS
    {
        return Err(VolfitError::invalid(
            "degenerate polynomial design: too few effective strikes".to_string(),
        ));
    }
    let sol = svd
        .solve(&rhs, rank_eps)
        .map_err(|e| VolfitError::invalid(format!("polynomial least-squares solve failed: {e}")))?;
    let mut coeffs = [0.0; poly::N_COEFFS];
    coeffs.copy_from_slice(sol.as_slice());
    PolyParams::new(coeffs)
}
