use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use cechsim_core::cech::{cech_complex_with, BuildOptions, DEFAULT_SIMPLEX_CAP};
use cechsim_core::harness::presets::{check_lln, run_scaling_check, CheckOutcome, Preset, DEFAULT_SEED};
use cechsim_core::harness::{
    estimate_beta_hat_with, run_convergence, run_coupling_gap, run_lln_curve, write_gnuplot, write_results_csv,
    write_summary_json, ExperimentConfig, MetricConfig, ProcessKind, ResultRecord, SettingConfig,
};
use cechsim_core::homology::Persistence;
use cechsim_core::limits::{write_limit_table, LimitRow};
use cechsim_core::sampling::{sample_binomial, sample_manifold, sample_poissonized};
use cechsim_core::{AtlasConfig, DensityConfig, Error, PointCloud};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::files;
use crate::SIMPLEX_CAP_ENV;

#[derive(Debug)]
pub enum Failure {
    Config(Error),
    ResourceCap(Error),
    Check(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::ResourceCap(_) => 3,
            Failure::Check(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) | Failure::ResourceCap(e) => write!(f, "{e}"),
            Failure::Check(labels) => write!(f, "check failed: {}", labels.join("; ")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap { .. } => Failure::ResourceCap(e),
            other => Failure::Config(other),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Config(Error::InvalidArgument(msg.into()))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',').map(|t| t.trim().parse::<T>().map_err(|_| invalid(format!("bad {what} entry '{t}'")))).collect()
}

/// Simplex cap from the environment, or the default.
fn simplex_cap() -> Result<usize, Failure> {
    match std::env::var(SIMPLEX_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| invalid(format!("{SIMPLEX_CAP_ENV}={v} is not a count"))),
        Err(_) => Ok(DEFAULT_SIMPLEX_CAP),
    }
}

fn report_checks(checks: &[CheckOutcome]) -> Outcome {
    for c in checks {
        eprintln!("{}", c.line());
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.label.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed))
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Uniform density on a box, e.g. `0,1x0,1`.
    #[arg(long, conflicts_with_all = ["density", "manifold"])]
    uniform_box: Option<String>,
    /// Density config as inline JSON, e.g. `{"linear":{"dim":2}}`.
    #[arg(long, conflicts_with = "manifold")]
    density: Option<String>,
    /// Built-in manifold with uniform density: circle, torus or sphere.
    #[arg(long)]
    manifold: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Draw a Poisson(n) number of points.
    #[arg(long)]
    poissonized: bool,
    /// Write the binary format instead of CSV.
    #[arg(long, requires = "out")]
    binary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SampleSource {
    Density(DensityConfig),
    Manifold(AtlasConfig),
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleConfig {
    source: SampleSource,
    n: usize,
    seed: u64,
    process: ProcessKind,
}

fn parse_box(text: &str) -> Result<DensityConfig, Failure> {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for axis in text.split('x') {
        let bounds: Vec<f64> = parse_list(axis, "box bound")?;
        let [a, b] = bounds[..] else { return Err(invalid(format!("axis '{axis}' must be lo,hi"))) };
        lo.push(a);
        hi.push(b);
    }
    Ok(DensityConfig::UniformBox { lo, hi })
}

pub fn sample(args: SampleArgs) -> Outcome {
    let source = match (&args.uniform_box, &args.density, &args.manifold) {
        (Some(b), _, _) => SampleSource::Density(parse_box(b)?),
        (_, Some(json), _) => SampleSource::Density(serde_json::from_str(json)?),
        (_, _, Some(name)) => SampleSource::Manifold(AtlasConfig::preset(name)?),
        _ => return Err(invalid("one of --uniform-box, --density or --manifold is required")),
    };
    let process = if args.poissonized { ProcessKind::Poissonized } else { ProcessKind::Binomial };
    let config = SampleConfig { source, n: args.n, seed: args.seed, process };
    let cloud = match &config.source {
        SampleSource::Density(d) => {
            let spec = d.build()?;
            match process {
                ProcessKind::Binomial => sample_binomial(&spec, config.n, config.seed)?,
                ProcessKind::Poissonized => sample_poissonized(&spec, config.n, config.seed)?.0,
            }
        }
        SampleSource::Manifold(a) => sample_manifold(&a.build()?, config.n, config.seed, args.poissonized)?,
    };
    let mut w = files::create(args.out.as_deref())?;
    if args.binary {
        cloud.write_binary(&mut w)?;
    } else {
        cloud.write_csv(&mut w, &files::header("sample", &config)?)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct BettiArgs {
    /// Cloud file (CSV or binary).
    input: PathBuf,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1)]
    k_max: usize,
    /// Weighted norm ‖B(y − z)‖ with B given row by row, e.g. `2,0;0,1`.
    #[arg(long)]
    weights: Option<String>,
    /// Also build to the ambient dimension and report the Euler characteristic.
    #[arg(long)]
    euler: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BettiConfig<'a> {
    input: &'a Path,
    r: f64,
    k_max: usize,
    metric: MetricConfig,
    euler: bool,
    simplex_cap: usize,
}

#[derive(Debug, Serialize)]
struct BettiReport<'a> {
    config: BettiConfig<'a>,
    points: usize,
    betti: Vec<usize>,
    simplices: Vec<usize>,
    euler: Option<i64>,
}

fn parse_weights(text: &str) -> Result<MetricConfig, Failure> {
    let rows = text.split(';').map(|row| parse_list::<f64>(row, "weight")).collect::<Result<Vec<_>, _>>()?;
    Ok(MetricConfig::Weighted { rows })
}

pub fn betti(args: BettiArgs) -> Outcome {
    let metric = match &args.weights {
        Some(w) => parse_weights(w)?,
        None => MetricConfig::Euclidean,
    };
    let config = BettiConfig {
        input: &args.input,
        r: args.r,
        k_max: args.k_max,
        metric,
        euler: args.euler,
        simplex_cap: simplex_cap()?,
    };
    let cloud = files::read_cloud(&args.input)?;
    let report = if cloud.is_empty() {
        log::warn!("{} holds no points", args.input.display());
        BettiReport {
            points: 0,
            betti: vec![0; args.k_max + 1],
            simplices: vec![0; args.k_max + 2],
            euler: args.euler.then_some(0),
            config,
        }
    } else {
        betti_report(&cloud, config)?
    };
    let mut w = files::create(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn betti_report<'a>(cloud: &PointCloud, config: BettiConfig<'a>) -> Result<BettiReport<'a>, Failure> {
    let metric = config.metric.build(cloud.dim())?;
    let ambient = metric.working_dim();
    let betti_top = if config.euler { config.k_max.max(ambient - 1) } else { config.k_max };
    let build_dim = betti_top + 1;
    let complex =
        cech_complex_with(cloud, config.r, &metric, build_dim, BuildOptions { simplex_cap: config.simplex_cap })?;
    let persistence = Persistence::compute(&complex, build_dim);
    let all: Vec<usize> = (0..=betti_top).map(|k| persistence.unpaired_count(k)).collect();
    let euler = config.euler.then(|| {
        all.iter().take(ambient).enumerate().map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) }).sum()
    });
    let simplices = complex.simplex_counts().into_iter().take(config.k_max + 2).collect();
    Ok(BettiReport { points: cloud.len(), betti: all[..=config.k_max].to_vec(), simplices, euler, config })
}

#[derive(Debug, Args)]
pub struct ExperimentFlags {
    /// Pinned experiment: figure2-2d, figure2-3d or circle-beta0.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment config (JSON, or any output file of this tool).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated thermodynamic radii.
    #[arg(long)]
    r_grid: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix; writes `<prefix>.csv`, `<prefix>.json` and `<prefix>.dat`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentFlags {
    fn resolve(&self) -> Result<(ExperimentConfig, Option<Preset>), Failure> {
        let (mut config, preset) = match (&self.preset, &self.config) {
            (Some(name), _) => {
                let preset = Preset::from_name(name)?;
                let config = preset.config().ok_or_else(|| invalid(format!("{name} is run by the betahat command")))?;
                (config, Some(preset))
            }
            (None, Some(path)) => (files::read_config(path)?, None),
            (None, None) => return Err(invalid("either --preset or --config is required")),
        };
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(grid) = &self.r_grid {
            config.r_grid = parse_list(grid, "radius")?;
        }
        if let Some(k) = self.k_max {
            config.k_max = k;
        }
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        if std::env::var_os(SIMPLEX_CAP_ENV).is_some() {
            config.simplex_cap = simplex_cap()?;
        }
        config.validate()?;
        Ok((config, preset))
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    flags: ExperimentFlags,
    /// Compare against the preset's limit and exit 4 when outside its band.
    #[arg(long)]
    check: bool,
}

fn write_records(command: &str, out: Option<&Path>, config: &ExperimentConfig, records: &[ResultRecord]) -> Outcome {
    let header = files::header(command, config)?;
    let label = config.setting_label();
    match out {
        Some(prefix) => {
            let mut csv = files::create(Some(&files::with_extension(prefix, "csv")))?;
            write_results_csv(&mut csv, &label, &header, records)?;
            csv.flush()?;
            let mut json = files::create(Some(&files::with_extension(prefix, "json")))?;
            write_summary_json(&mut json, config, records)?;
            json.flush()?;
            let mut dat = files::create(Some(&files::with_extension(prefix, "dat")))?;
            write_gnuplot(&mut dat, &header, records)?;
            dat.flush()?;
        }
        None => {
            let mut w = files::create(None)?;
            write_results_csv(&mut w, &label, &header, records)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn lln(args: ExperimentArgs) -> Outcome {
    let (config, preset) = args.flags.resolve()?;
    if args.check && preset.is_none() {
        return Err(invalid("--check needs a --preset"));
    }
    let records = run_lln_curve(&config)?;
    write_records("lln", args.flags.out.as_deref(), &config, &records)?;
    match preset {
        Some(p) if args.check => report_checks(&check_lln(p, &records)?),
        _ => Ok(()),
    }
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    flags: ExperimentFlags,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long)]
    n_list: String,
}

pub fn convergence(args: ConvergenceArgs) -> Outcome {
    let (config, _) = args.flags.resolve()?;
    let n_list: Vec<usize> = parse_list(&args.n_list, "n")?;
    let report = run_convergence(&config, &n_list)?;
    let records: Vec<ResultRecord> = report.records.iter().flatten().cloned().collect();
    write_records("convergence", args.flags.out.as_deref(), &config, &records)?;
    for ri in 0..config.r_grid.len() {
        for k in 0..=config.k_max {
            let trend = report.betti_stderr_trend(ri, k);
            eprintln!(
                "r={} beta{k}/n stderr by n: {:?} ({})",
                config.r_grid[ri],
                trend,
                if report.dispersion_decreases(ri, k) { "decreasing" } else { "not decreasing" }
            );
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BetahatArgs {
    /// Ambient dimension.
    #[arg(long = "N", default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Window volume.
    #[arg(long = "L", default_value_t = 1e4)]
    volume: f64,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// `scaling-check` runs the pinned scaling comparison instead.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, requires = "preset")]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BetahatConfig {
    dim: usize,
    lambda: f64,
    r: f64,
    volume: f64,
    trials: usize,
    seed: u64,
    simplex_cap: usize,
}

pub fn betahat(args: BetahatArgs) -> Outcome {
    if let Some(name) = &args.preset {
        if Preset::from_name(name)? != Preset::ScalingCheck {
            return Err(invalid(format!("{name} is run by the lln command")));
        }
        let checks = run_scaling_check(args.volume, args.trials, args.seed)?;
        let config =
            serde_json::json!({ "preset": name, "volume": args.volume, "trials": args.trials, "seed": args.seed });
        let mut w = files::create(args.out.as_deref())?;
        for line in files::header("betahat", &config)? {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "label,observed,stderr,target,band,passed")?;
        for c in &checks {
            writeln!(w, "{},{},{},{},{},{}", c.label, c.observed, c.stderr, c.target, c.band, c.passed)?;
        }
        w.flush()?;
        return if args.check { report_checks(&checks) } else { Ok(()) };
    }
    let config = BetahatConfig {
        dim: args.dim,
        lambda: args.lambda,
        r: args.r,
        volume: args.volume,
        trials: args.trials,
        seed: args.seed,
        simplex_cap: simplex_cap()?,
    };
    let est = estimate_beta_hat_with(
        config.dim,
        config.lambda,
        config.r,
        config.volume,
        config.trials,
        config.seed,
        config.simplex_cap,
    )?;
    let rows: Vec<LimitRow> = est
        .betti
        .iter()
        .enumerate()
        .map(|(k, e)| LimitRow { m: config.dim, k, lambda: config.lambda, r: config.r, estimate: *e })
        .collect();
    let mut w = files::create(args.out.as_deref())?;
    for line in files::header("betahat", &config)? {
        writeln!(w, "# {line}")?;
    }
    write_limit_table(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    /// Experiment config; defaults to the uniform unit square.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated sample sizes.
    #[arg(long, default_value = "1000,10000")]
    n: String,
    /// Comma-separated thermodynamic radii (overrides the config).
    #[arg(long)]
    r_grid: Option<String>,
    /// Simplex dimension whose count is compared.
    #[arg(long, default_value_t = 1)]
    j: usize,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CouplingConfig<'a> {
    experiment: &'a ExperimentConfig,
    n_list: &'a [usize],
    j: usize,
}

pub fn coupling(args: CouplingArgs) -> Outcome {
    let mut config = match &args.config {
        Some(path) => files::read_config(path)?,
        None => ExperimentConfig {
            name: "unit-square".into(),
            setting: SettingConfig::Euclidean {
                density: DensityConfig::UniformBox { lo: vec![0.0; 2], hi: vec![1.0; 2] },
                metric: MetricConfig::Euclidean,
            },
            process: ProcessKind::Binomial,
            n: 1,
            r_grid: vec![0.5],
            trials: 20,
            k_max: 0,
            euler: false,
            master_seed: DEFAULT_SEED,
            simplex_cap: DEFAULT_SIMPLEX_CAP,
        },
    };
    if let Some(grid) = &args.r_grid {
        config.r_grid = parse_list(grid, "radius")?;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if std::env::var_os(SIMPLEX_CAP_ENV).is_some() {
        config.simplex_cap = simplex_cap()?;
    }
    let n_list: Vec<usize> = parse_list(&args.n, "n")?;
    let records = run_coupling_gap(&config, &n_list, args.j)?;
    let resolved = CouplingConfig { experiment: &config, n_list: &n_list, j: args.j };
    let mut w = files::create(args.out.as_deref())?;
    for line in files::header("coupling", &resolved)? {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "n,r,j,mean_gap,stderr,trials,seed")?;
    for rec in &records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            rec.n,
            rec.r,
            rec.j,
            rec.mean_gap.value,
            rec.mean_gap.stderr,
            rec.trials.len(),
            config.master_seed
        )?;
    }
    w.flush()?;
    Ok(())
}
