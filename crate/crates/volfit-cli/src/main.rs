//! Command-line surface for the `volfit` library.
//!
//! Subcommands: `fit` calibrates one model to an option-chain CSV and
//! prints fit JSON, `sweep` tabulates model smiles while varying a single
//! parameter, `benchmark` runs the RMSE harness over a corpus directory,
//! `mc` compares Monte Carlo smiles against the matching asymptotic
//! formula, and `invert` backs an implied volatility out of one price.
//!
//! Exit codes: 0 on success (including `--help`/`--version`), 1 on usage
//! or input errors, 2 on computation failures (no solution, no
//! convergence). Numbers are printed with 17 significant digits — enough
//! to round-trip an f64 exactly — unless `--precision` lowers that.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use volfit::harness::{emit_report, load_corpus_dir, run_benchmark, BenchConfig, ReportFormat};
use volfit::market::{build_smile, parse_chain_file, SelectionRule};
use volfit::mc::{mc_smile, Dynamics, McConfig};
use volfit::{
    fit, implied_vol, FitConfig, FitResult, FittedParams, ForwardContext, ModelKind, OptionKind,
    SabrParams, SkewSdeParams, Smile, SmilePoint, VolfitError,
};

#[derive(Parser)]
#[command(
    name = "volfit",
    version,
    about = "Volatility-smile models: calibration, sweeps, benchmarks, and Monte Carlo checks"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = automatic). Falls back to
    /// the VOLFIT_THREADS environment variable when the flag is absent.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate a model to an option-chain CSV and print fit JSON.
    Fit(FitArgs),
    /// Evaluate a model over a strike grid while varying one parameter.
    Sweep(SweepArgs),
    /// Calibrate every requested model to every chain in a corpus directory.
    Benchmark(BenchmarkArgs),
    /// Simulate a smile and tabulate it against the asymptotic formula.
    Mc(McArgs),
    /// Back an implied volatility out of a single undiscounted price.
    Invert(InvertArgs),
}

/// Calibration knobs shared by `fit` and `benchmark`; unset flags keep the
/// library defaults.
#[derive(Args)]
struct FitOpts {
    /// Number of optimiser starts.
    #[arg(long)]
    n_starts: Option<usize>,

    /// Iteration cap per optimiser start.
    #[arg(long)]
    max_iterations: Option<u64>,

    /// Simplex spread tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Seed for the jittered starts.
    #[arg(long)]
    seed: Option<u64>,

    /// Let the Hagan backbone exponent float instead of pinning beta = 1.
    #[arg(long)]
    free_beta: bool,

    /// Weight every strike equally instead of the ATM-centred Gaussian.
    #[arg(long)]
    equal_weights: bool,
}

impl FitOpts {
    fn to_config(&self) -> FitConfig {
        let mut cfg = FitConfig::default();
        if let Some(n) = self.n_starts {
            cfg.n_starts = n;
        }
        if let Some(n) = self.max_iterations {
            cfg.max_iterations = n;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.free_beta = self.free_beta;
        cfg
    }
}

#[derive(Args)]
struct FitArgs {
    /// Model to calibrate: hagan, skew, svi, poly, or spline.
    #[arg(long)]
    model: String,

    /// Option-chain CSV with columns timestamp, expiry, strike, kind, bid,
    /// ask, forward, tau and optionally iv.
    #[arg(long)]
    input: PathBuf,

    /// Call/put selection rule: spread, otm, or iv.
    #[arg(long, default_value = "spread")]
    rule: String,

    #[command(flatten)]
    fit_opts: FitOpts,

    /// Write the JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    /// Model to evaluate: hagan, skew, svi, or poly.
    #[arg(long)]
    model: String,

    /// Base parameters as comma-separated name=value pairs, for example
    /// "alpha=0.25,rho=-0.2,nu=1".
    #[arg(long)]
    params: String,

    /// Name of the parameter to vary.
    #[arg(long)]
    sweep_param: String,

    /// Explicit sweep values, comma-separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["from", "to", "steps"])]
    values: Option<String>,

    /// Sweep range start (with --to and --steps).
    #[arg(long, requires = "to", requires = "steps")]
    from: Option<f64>,

    /// Sweep range end, inclusive.
    #[arg(long, requires = "from")]
    to: Option<f64>,

    /// Number of evenly spaced sweep values.
    #[arg(long, requires = "from")]
    steps: Option<usize>,

    /// Forward price of the strike grid.
    #[arg(long, default_value_t = 5685.6)]
    forward: f64,

    /// Time to maturity in years.
    #[arg(long, default_value_t = 0.176)]
    tau: f64,

    /// Lowest strike of the grid.
    #[arg(long, default_value_t = 3900.0)]
    k_min: f64,

    /// Highest strike of the grid.
    #[arg(long, default_value_t = 7400.0)]
    k_max: f64,

    /// Strike spacing of the grid.
    #[arg(long, default_value_t = 100.0)]
    k_step: f64,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Directory of chain CSVs named <group>__<timestamp>.csv.
    #[arg(long)]
    corpus: PathBuf,

    /// Comma-separated models to benchmark.
    #[arg(long, default_value = "hagan,skew,svi,poly,spline")]
    models: String,

    /// Report format: csv, json, or markdown.
    #[arg(long, default_value = "csv")]
    format: String,

    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Call/put selection rule: spread, otm, or iv.
    #[arg(long, default_value = "spread")]
    rule: String,

    /// Keep only snapshots whose timestamp part contains this substring.
    #[arg(long)]
    timestamp_filter: Option<String>,

    /// Report 5% trimmed means instead of plain means.
    #[arg(long)]
    trim: bool,

    #[command(flatten)]
    fit_opts: FitOpts,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct McArgs {
    /// Dynamics to simulate: lognormal, general, or skew-variance.
    #[arg(long)]
    dynamics: String,

    /// Initial volatility level.
    #[arg(long)]
    alpha: f64,

    /// Backbone exponent (general dynamics only).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Spot/vol correlation.
    #[arg(long)]
    rho: f64,

    /// Volatility of volatility.
    #[arg(long)]
    nu: f64,

    /// Volatility level shift (skew-variance dynamics only).
    #[arg(long, default_value_t = 0.0)]
    m: f64,

    /// Forward price.
    #[arg(long, default_value_t = 100.0)]
    forward: f64,

    /// Time to maturity in years.
    #[arg(long, default_value_t = 0.25)]
    tau: f64,

    /// Lowest strike of the grid.
    #[arg(long, default_value_t = 85.0)]
    k_min: f64,

    /// Highest strike of the grid.
    #[arg(long, default_value_t = 115.0)]
    k_max: f64,

    /// Strike spacing of the grid.
    #[arg(long, default_value_t = 5.0)]
    k_step: f64,

    /// Number of simulated terminal samples.
    #[arg(long, default_value_t = 1 << 18)]
    paths: usize,

    /// Time steps per path.
    #[arg(long, default_value_t = 128)]
    steps: usize,

    /// Simulation seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Disable antithetic pairing.
    #[arg(long)]
    no_antithetic: bool,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct InvertArgs {
    /// Forward price.
    #[arg(long)]
    forward: f64,

    /// Time to maturity in years.
    #[arg(long)]
    tau: f64,

    /// Strike.
    #[arg(long)]
    strike: f64,

    /// Undiscounted option price.
    #[arg(long)]
    price: f64,

    /// Option kind: call or put.
    #[arg(long)]
    kind: String,

    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits with 2 on usage errors by default, but this tool
            // reserves 2 for computation failures.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    if let Err(err) = configure_threads(cli.threads) {
        eprintln!("error: {err}");
        return ExitCode::from(1);
    }

    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Mc(args) => cmd_mc(args),
        Command::Invert(args) => cmd_invert(args),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &VolfitError) -> u8 {
    match err {
        VolfitError::InvalidInput { .. } | VolfitError::Io(_) | VolfitError::Csv(_) => 1,
        VolfitError::NoSolution { .. } | VolfitError::NonConvergence { .. } => 2,
    }
}

/// Installs the global rayon pool when a thread count is requested via
/// `--threads` or VOLFIT_THREADS; 0 lets rayon choose.
fn configure_threads(flag: Option<usize>) -> volfit::Result<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("VOLFIT_THREADS") {
            Ok(raw) => Some(raw.trim().parse::<usize>().map_err(|_| {
                VolfitError::invalid(format!("VOLFIT_THREADS must be a non-negative integer, got {raw:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| VolfitError::invalid(format!("could not configure thread pool: {e}")))?;
    }
    Ok(())
}

/// Scientific notation with `precision` significant digits; 17 digits
/// round-trip any f64.
fn fmt_num(x: f64, precision: u8) -> String {
    format!("{:.*e}", precision as usize - 1, x)
}

fn write_output(path: Option<&Path>, content: &str) -> volfit::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

/// Replaces every point weight with 1.0, overriding the default
/// ATM-centred Gaussian weighting.
fn equal_weight(smile: &Smile) -> volfit::Result<Smile> {
    let points = smile
        .points()
        .iter()
        .map(|p| SmilePoint {
            strike: p.strike,
            iv: p.iv,
            weight: 1.0,
        })
        .collect();
    Smile::new(*smile.ctx(), points)
}

fn strike_grid(k_min: f64, k_max: f64, k_step: f64) -> volfit::Result<Vec<f64>> {
    if !(k_min.is_finite() && k_min > 0.0) {
        return Err(VolfitError::invalid(format!(
            "k-min must be finite and positive, got {k_min}"
        )));
    }
    if !(k_max.is_finite() && k_max >= k_min) {
        return Err(VolfitError::invalid(format!(
            "k-max must be finite and at least k-min, got {k_max}"
        )));
    }
    if !(k_step.is_finite() && k_step > 0.0) {
        return Err(VolfitError::invalid(format!(
            "k-step must be finite and positive, got {k_step}"
        )));
    }
    // Half-step slack keeps the top strike on the grid despite float error.
    let n = ((k_max - k_min) / k_step + 0.5).floor() as usize;
    Ok((0..=n).map(|i| k_min + i as f64 * k_step).collect())
}

fn parse_kind(s: &str) -> volfit::Result<OptionKind> {
    match s.trim().to_ascii_lowercase().as_str() {
        "call" | "c" => Ok(OptionKind::Call),
        "put" | "p" => Ok(OptionKind::Put),
        other => Err(VolfitError::invalid(format!(
            "unknown option kind {other:?}; expected call or put"
        ))),
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> volfit::Result<()> {
    let model: ModelKind = args.model.parse()?;
    let rule: SelectionRule = args.rule.parse()?;

    let parsed = parse_chain_file(&args.input)?;
    for err in &parsed.errors {
        eprintln!("warning: {}: row {}: {}", args.input.display(), err.row, err.message);
    }
    let built = build_smile(&parsed.records, rule)?;
    let smile = if args.fit_opts.equal_weights {
        equal_weight(&built.smile)?
    } else {
        built.smile
    };

    let cfg = args.fit_opts.to_config();
    let result = fit(model, &smile, &cfg)?;
    let json = fit_json(&result, smile.points().len(), built.n_dropped, args.precision);
    write_output(args.output.as_deref(), &json)
}

/// Renders the fit result as JSON by hand so `--precision` applies to
/// every number. All keys are fixed identifiers, so no escaping is needed.
fn fit_json(result: &FitResult, n_points: usize, n_dropped: usize, precision: u8) -> String {
    let p = precision;
    let params = match &result.params {
        FittedParams::Hagan(x) => format!(
            "{{\"alpha\": {}, \"beta\": {}, \"rho\": {}, \"nu\": {}}}",
            fmt_num(x.alpha, p),
            fmt_num(x.beta, p),
            fmt_num(x.rho, p),
            fmt_num(x.nu, p)
        ),
        FittedParams::Skew(x) => format!(
            "{{\"alpha\": {}, \"rho\": {}, \"nu\": {}, \"c\": {}, \"d\": {}}}",
            fmt_num(x.alpha, p),
            fmt_num(x.rho, p),
            fmt_num(x.nu, p),
            fmt_num(x.c, p),
            fmt_num(x.d, p)
        ),
        FittedParams::Svi(x) => format!(
            "{{\"a\": {}, \"b\": {}, \"rho\": {}, \"m\": {}, \"sigma\": {}}}",
            fmt_num(x.a, p),
            fmt_num(x.b, p),
            fmt_num(x.rho, p),
            fmt_num(x.m, p),
            fmt_num(x.sigma, p)
        ),
        FittedParams::Poly(x) => format!(
            "{{\"c0\": {}, \"c1\": {}, \"c2\": {}, \"c3\": {}, \"c4\": {}}}",
            fmt_num(x.coeffs[0], p),
            fmt_num(x.coeffs[1], p),
            fmt_num(x.coeffs[2], p),
            fmt_num(x.coeffs[3], p),
            fmt_num(x.coeffs[4], p)
        ),
        FittedParams::Spline(m) => format!(
            "{{\"knots\": [{}], \"coeffs\": [{}]}}",
            join_nums(m.knots(), p),
            join_nums(m.coeffs(), p)
        ),
    };
    format!(
        "{{\n  \"model\": \"{}\",\n  \"params\": {},\n  \"objective\": {},\n  \"rmse\": {},\n  \"converged\": {},\n  \"n_evals\": {},\n  \"start_index\": {},\n  \"n_points\": {},\n  \"n_dropped\": {}\n}}\n",
        result.params.kind().name(),
        params,
        fmt_num(result.objective, p),
        fmt_num(result.rmse, p),
        result.converged,
        result.n_evals,
        result.start_index,
        n_points,
        n_dropped
    )
}

fn join_nums(xs: &[f64], precision: u8) -> String {
    xs.iter()
        .map(|&x| fmt_num(x, precision))
        .collect::<Vec<_>>()
        .join(", ")
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn param_names(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Hagan => &["alpha", "beta", "rho", "nu"],
        ModelKind::Skew => &["alpha", "rho", "nu", "c", "d"],
        ModelKind::Svi => &["a", "b", "rho", "m", "sigma"],
        ModelKind::Poly => &["c0", "c1", "c2", "c3", "c4"],
        ModelKind::Spline => &[],
    }
}

/// Parses "name=value,name=value" into a map, rejecting malformed pairs
/// and duplicate names.
fn parse_assignments(raw: &str) -> volfit::Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for piece in raw.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(VolfitError::invalid(format!(
                "empty assignment in parameter list {raw:?}"
            )));
        }
        let (name, value) = piece.split_once('=').ok_or_else(|| {
            VolfitError::invalid(format!("expected name=value, got {piece:?}"))
        })?;
        let name = name.trim().to_ascii_lowercase();
        let value: f64 = value.trim().parse().map_err(|_| {
            VolfitError::invalid(format!("could not parse value in {piece:?}"))
        })?;
        if map.insert(name.clone(), value).is_some() {
            return Err(VolfitError::invalid(format!("duplicate parameter {name:?}")));
        }
    }
    Ok(map)
}

/// Builds evaluable params from a complete name→value map. Hagan's beta
/// defaults to 1 when omitted.
fn params_from_map(kind: ModelKind, map: &BTreeMap<String, f64>) -> volfit::Result<FittedParams> {
    let need = |name: &str| -> volfit::Result<f64> {
        map.get(name).copied().ok_or_else(|| {
            VolfitError::invalid(format!("missing parameter {name:?} for model {kind}"))
        })
    };
    match kind {
        ModelKind::Hagan => {
            let beta = map.get("beta").copied().unwrap_or(1.0);
            Ok(FittedParams::Hagan(SabrParams::new(
                need("alpha")?,
                beta,
                need("rho")?,
                need("nu")?,
            )?))
        }
        ModelKind::Skew => Ok(FittedParams::Skew(volfit::SkewSabrParams::new(
            need("alpha")?,
            need("rho")?,
            need("nu")?,
            need("c")?,
            need("d")?,
        )?)),
        ModelKind::Svi => Ok(FittedParams::Svi(volfit::svi::SviParams::new(
            need("a")?,
            need("b")?,
            need("rho")?,
            need("m")?,
            need("sigma")?,
        )?)),
        ModelKind::Poly => Ok(FittedParams::Poly(volfit::poly::PolyParams::new([
            need("c0")?,
            need("c1")?,
            need("c2")?,
            need("c3")?,
            need("c4")?,
        ])?)),
        ModelKind::Spline => Err(VolfitError::invalid(
            "spline has no parametric form to evaluate".to_string(),
        )),
    }
}

fn sweep_values(args: &SweepArgs) -> volfit::Result<Vec<f64>> {
    let values = match (&args.values, args.from) {
        (Some(raw), _) => raw
            .split(',')
            .map(|piece| {
                piece.trim().parse::<f64>().map_err(|_| {
                    VolfitError::invalid(format!("could not parse sweep value {piece:?}"))
                })
            })
            .collect::<volfit::Result<Vec<f64>>>()?,
        (None, Some(from)) => {
            // clap's `requires` guarantees --to and --steps came with --from.
            let to = args.to.unwrap();
            let steps = args.steps.unwrap();
            if steps == 0 {
                return Err(VolfitError::invalid("steps must be at least 1".to_string()));
            }
            if steps == 1 {
                vec![from]
            } else {
                (0..steps)
                    .map(|i| from + i as f64 * (to - from) / (steps - 1) as f64)
                    .collect()
            }
        }
        (None, None) => {
            return Err(VolfitError::invalid(
                "provide sweep values via --values or --from/--to/--steps".to_string(),
            ))
        }
    };
    if values.is_empty() {
        return Err(VolfitError::invalid("sweep value list is empty".to_string()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(VolfitError::invalid(format!("sweep values must be finite, got {bad}")));
    }
    Ok(values)
}

fn cmd_sweep(args: SweepArgs) -> volfit::Result<()> {
    let model: ModelKind = args.model.parse()?;
    let names = param_names(model);
    if names.is_empty() {
        return Err(VolfitError::invalid(format!(
            "model {model} has no parameters to sweep"
        )));
    }

    let sweep_param = args.sweep_param.trim().to_ascii_lowercase();
    if !names.contains(&sweep_param.as_str()) {
        return Err(VolfitError::invalid(format!(
            "{sweep_param:?} is not a {model} parameter; expected one of {names:?}"
        )));
    }

    let base = parse_assignments(&args.params)?;
    for name in base.keys() {
        if !names.contains(&name.as_str()) {
            return Err(VolfitError::invalid(format!(
                "{name:?} is not a {model} parameter; expected one of {names:?}"
            )));
        }
    }

    let values = sweep_values(&args)?;
    let strikes = strike_grid(args.k_min, args.k_max, args.k_step)?;
    let ctx = ForwardContext::new(args.forward, args.tau)?;

    let mut out = String::from("param_value,strike,iv\n");
    for &value in &values {
        let mut full = base.clone();
        full.insert(sweep_param.clone(), value);
        let params = params_from_map(model, &full)?;
        for &strike in &strikes {
            let iv = params.vol(&ctx, strike)?;
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_num(value, args.precision),
                fmt_num(strike, args.precision),
                fmt_num(iv, args.precision)
            );
        }
    }
    write_output(args.output.as_deref(), &out)
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

fn parse_models(raw: &str) -> volfit::Result<Vec<ModelKind>> {
    let mut models = Vec::new();
    for piece in raw.split(',') {
        let model: ModelKind = piece.parse()?;
        if !models.contains(&model) {
            models.push(model);
        }
    }
    Ok(models)
}

fn cmd_benchmark(args: BenchmarkArgs) -> volfit::Result<()> {
    let models = parse_models(&args.models)?;
    let format: ReportFormat = args.format.parse()?;
    let rule: SelectionRule = args.rule.parse()?;

    let mut corpus = load_corpus_dir(&args.corpus, rule, args.timestamp_filter.as_deref())?;
    if args.fit_opts.equal_weights {
        for labeled in &mut corpus {
            labeled.smile = equal_weight(&labeled.smile)?;
        }
    }

    let cfg = BenchConfig {
        fit: args.fit_opts.to_config(),
        trim: args.trim,
    };
    let report = run_benchmark(&corpus, &models, &cfg)?;

    match args.output.as_deref() {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            emit_report(&report, format, &mut file)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            emit_report(&report, format, &mut stdout)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mc
// ---------------------------------------------------------------------------

fn cmd_mc(args: McArgs) -> volfit::Result<()> {
    let ctx = ForwardContext::new(args.forward, args.tau)?;

    // Each dynamics pairs with the closed form it converges to.
    let (dynamics, asymptotic) = match args.dynamics.trim().to_ascii_lowercase().as_str() {
        "lognormal" => {
            let p = SabrParams::lognormal(args.alpha, args.rho, args.nu)?;
            (Dynamics::HaganLognormal(p), p)
        }
        "general" => {
            let p = SabrParams::new(args.alpha, args.beta, args.rho, args.nu)?;
            (Dynamics::HaganGeneralBeta(p), p)
        }
        "skew-variance" => {
            let p = SkewSdeParams::new(args.alpha, args.rho, args.nu, args.m)?;
            (Dynamics::SkewVariance(p), p.equivalent_hagan())
        }
        other => {
            return Err(VolfitError::invalid(format!(
                "unknown dynamics {other:?}; expected lognormal, general, or skew-variance"
            )))
        }
    };

    let cfg = McConfig {
        n_paths: args.paths,
        n_steps: args.steps,
        seed: args.seed,
        antithetic: !args.no_antithetic,
    };
    let strikes = strike_grid(args.k_min, args.k_max, args.k_step)?;
    let rows = mc_smile(&dynamics, &ctx, &strikes, &cfg)?;

    let mut out = String::from("strike,mc_iv,std_error,asymptotic_iv,gap\n");
    for row in &rows {
        let asym = asymptotic.vol(&ctx, row.strike)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(row.strike, args.precision),
            fmt_num(row.iv, args.precision),
            fmt_num(row.iv_std_error, args.precision),
            fmt_num(asym, args.precision),
            fmt_num(row.iv - asym, args.precision)
        );
    }
    write_output(args.output.as_deref(), &out)
}

// ---------------------------------------------------------------------------
// invert
// ---------------------------------------------------------------------------

fn cmd_invert(args: InvertArgs) -> volfit::Result<()> {
    let ctx = ForwardContext::new(args.forward, args.tau)?;
    let kind = parse_kind(&args.kind)?;
    let iv = implied_vol(&ctx, args.strike, args.price, kind)?;
    let mut line = fmt_num(iv, args.precision);
    line.push('\n');
    write_output(None, &line)
}
