//! Thermodynamic-regime experiments.
//!
//! Every trial samples one cloud, builds one Čech filtration up to the largest
//! radius of the grid and reduces it once; the statistics at each grid radius
//! `r` are read off the filtration at `r_n = r · n^{−1/dim}`. Trial `t` draws
//! its cloud from the seed derived from `(master_seed, t)`, so the clouds are
//! shared across the radius grid and complexes at different radii of one
//! trial are nested.

mod output;
pub mod presets;

pub use output::{write_gnuplot, write_results_csv, write_summary_json};

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cech::{cech_filtration_with, BuildOptions, SimplicialComplex, DEFAULT_SIMPLEX_CAP};
use crate::error::{Error, Result};
use crate::geometry::{AtlasConfig, ChartAtlas, MetricSpec};
use crate::homology::{betti_diff_bound_check, Persistence};
use crate::limits::LimitEstimate;
use crate::rng::derive_seed;
use crate::sampling::{
    centered_window, poissonized_count, sample_binomial, sample_homogeneous, sample_manifold, sample_poissonized,
    DensityConfig, DensitySpec, PointCloud,
};

/// Metric used in the Euclidean setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricConfig {
    Euclidean,
    /// `‖B(y − z)‖` with `B` given row by row.
    Weighted {
        rows: Vec<Vec<f64>>,
    },
}

impl MetricConfig {
    pub fn build(&self, dim: usize) -> Result<MetricSpec> {
        match self {
            MetricConfig::Euclidean => Ok(MetricSpec::euclidean(dim)),
            MetricConfig::Weighted { rows } => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::InvalidArgument(format!("weight matrix must be {dim}×{dim}")));
                }
                MetricSpec::weighted(DMatrix::from_row_iterator(dim, dim, rows.iter().flatten().copied()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingConfig {
    Euclidean {
        density: DensityConfig,
        #[serde(default = "euclidean_metric")]
        metric: MetricConfig,
    },
    Manifold {
        atlas: AtlasConfig,
    },
}

fn euclidean_metric() -> MetricConfig {
    MetricConfig::Euclidean
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Binomial,
    Poissonized,
}

/// Parameters of one thermodynamic-regime run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub setting: SettingConfig,
    #[serde(default = "default_process")]
    pub process: ProcessKind,
    pub n: usize,
    /// Thermodynamic radii `r`; strictly increasing.
    pub r_grid: Vec<f64>,
    pub trials: usize,
    pub k_max: usize,
    /// Also report χ/n (complexes are then built to the ambient dimension).
    #[serde(default)]
    pub euler: bool,
    pub master_seed: u64,
    #[serde(default = "default_cap")]
    pub simplex_cap: usize,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_process() -> ProcessKind {
    ProcessKind::Binomial
}

fn default_cap() -> usize {
    DEFAULT_SIMPLEX_CAP
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument("r-grid must hold positive radii".into()));
        }
        if self.r_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("r-grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Short label for the `setting` CSV column.
    pub fn setting_label(&self) -> String {
        match &self.setting {
            SettingConfig::Euclidean { .. } => format!("euclidean:{}", self.name),
            SettingConfig::Manifold { atlas } => format!("manifold:{}", atlas.name),
        }
    }
}

/// Resolved sampling setting.
#[derive(Debug, Clone)]
pub enum Setting {
    Euclidean { density: DensitySpec, metric: MetricSpec },
    Manifold { atlas: ChartAtlas },
}

impl Setting {
    pub fn from_config(cfg: &SettingConfig) -> Result<Self> {
        Ok(match cfg {
            SettingConfig::Euclidean { density, metric } => {
                let density = density.build()?;
                let metric = metric.build(density.dim())?;
                Setting::Euclidean { density, metric }
            }
            SettingConfig::Manifold { atlas } => Setting::Manifold { atlas: atlas.build()? },
        })
    }

    /// Dimension governing the regime: N in the Euclidean setting, m on a manifold.
    pub fn regime_dim(&self) -> usize {
        match self {
            Setting::Euclidean { density, .. } => density.dim(),
            Setting::Manifold { atlas } => atlas.manifold_dim(),
        }
    }

    /// Dimension of the space complexes are built in.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Setting::Euclidean { metric, .. } => metric.working_dim(),
            Setting::Manifold { atlas } => atlas.ambient_dim(),
        }
    }

    pub fn metric(&self) -> MetricSpec {
        match self {
            Setting::Euclidean { metric, .. } => metric.clone(),
            Setting::Manifold { atlas } => MetricSpec::euclidean(atlas.ambient_dim()),
        }
    }

    /// Samples the process; returns the cloud and its point count.
    pub fn sample(&self, process: ProcessKind, n: usize, seed: u64) -> Result<PointCloud> {
        match (self, process) {
            (Setting::Euclidean { density, .. }, ProcessKind::Binomial) => sample_binomial(density, n, seed),
            (Setting::Euclidean { density, .. }, ProcessKind::Poissonized) => {
                Ok(sample_poissonized(density, n, seed)?.0)
            }
            (Setting::Manifold { atlas }, p) => sample_manifold(atlas, n, seed, p == ProcessKind::Poissonized),
        }
    }
}

/// `r_n = r · n^{−1/dim}`.
pub fn regime_radius(r: f64, n: usize, dim: usize) -> f64 {
    r * (n as f64).powf(-1.0 / dim as f64)
}

/// Statistics of one trial at one radius, normalized by the nominal `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub seed: u64,
    pub points: usize,
    /// `β_k / n` for `k = 0..=k_max`.
    pub betti: Vec<f64>,
    /// `S_j / n` for `j = 0..=build_dim`.
    pub simplices: Vec<f64>,
    /// `χ / n` with `χ = Σ_{k<N} (−1)^k β_k`.
    pub euler: Option<f64>,
}

/// Aggregated statistics at one grid radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub n: usize,
    pub r: f64,
    pub r_n: f64,
    pub trials: Vec<TrialStats>,
    pub betti: Vec<LimitEstimate>,
    pub simplices: Vec<LimitEstimate>,
    pub euler: Option<LimitEstimate>,
    pub master_seed: u64,
    /// Wall time of the whole run, shared by its records.
    pub wall_time_s: f64,
}

impl ResultRecord {
    fn aggregate(n: usize, r: f64, r_n: f64, trials: Vec<TrialStats>, master_seed: u64) -> Self {
        let column =
            |f: &dyn Fn(&TrialStats) -> f64| LimitEstimate::from_samples(&trials.iter().map(f).collect::<Vec<_>>());
        let kb = trials.first().map_or(0, |t| t.betti.len());
        let ks = trials.first().map_or(0, |t| t.simplices.len());
        let betti = (0..kb).map(|k| column(&|t| t.betti[k])).collect();
        let simplices = (0..ks).map(|j| column(&|t| t.simplices[j])).collect();
        let euler = trials.first().and_then(|t| t.euler).map(|_| column(&|t| t.euler.unwrap_or(f64::NAN)));
        Self { n, r, r_n, trials, betti, simplices, euler, master_seed, wall_time_s: 0.0 }
    }

    /// Equality of everything except wall time.
    pub fn same_statistics(&self, other: &Self) -> bool {
        Self { wall_time_s: 0.0, ..self.clone() } == Self { wall_time_s: 0.0, ..other.clone() }
    }
}

/// Dimensions needed for a run: (complex dimension, highest Betti index).
fn plan_dims(config: &ExperimentConfig, ambient: usize) -> (usize, usize) {
    let mut betti_top = config.k_max;
    if config.euler {
        betti_top = betti_top.max(ambient - 1);
    }
    (betti_top + 1, betti_top)
}

/// Statistics of one cloud at each radius of `radii` (already in the n-scaled units).
fn trial_stats(
    cloud: &PointCloud,
    metric: &MetricSpec,
    radii: &[f64],
    n: usize,
    config: &ExperimentConfig,
    ambient: usize,
) -> Result<Vec<TrialStats>> {
    let (build_dim, betti_top) = plan_dims(config, ambient);
    let r_max = *radii.last().expect("nonempty grid");
    let filtration =
        cech_filtration_with(cloud, metric, build_dim, r_max, BuildOptions { simplex_cap: config.simplex_cap })?;
    let persistence = Persistence::compute(&filtration, build_dim);
    let scale = 1.0 / n as f64;
    Ok(radii
        .iter()
        .map(|&t| {
            let betti: Vec<usize> = (0..=betti_top).map(|k| persistence.persistent_betti(k, t, t)).collect();
            let simplices = (0..=build_dim)
                .map(|j| filtration.layer(j).map_or(0, |l| l.iter().filter(|(_, v)| *v <= t).count()) as f64 * scale)
                .collect();
            let euler = config.euler.then(|| {
                betti
                    .iter()
                    .take(ambient)
                    .enumerate()
                    .map(|(k, b)| if k % 2 == 0 { *b as f64 } else { -(*b as f64) })
                    .sum::<f64>()
                    * scale
            });
            TrialStats {
                seed: cloud.seed(),
                points: cloud.len(),
                betti: betti.iter().take(config.k_max + 1).map(|b| *b as f64 * scale).collect(),
                simplices,
                euler,
            }
        })
        .collect())
}

/// Seed of trial `t` of a run.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, &[trial as u64])
}

/// LLN curve: per grid radius, `β_k/n`, `S_j/n` and optionally `χ/n` over all trials.
pub fn run_lln_curve(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let setting = Setting::from_config(&config.setting)?;
    run_with_setting(config, &setting, config.n)
}

fn run_with_setting(config: &ExperimentConfig, setting: &Setting, n: usize) -> Result<Vec<ResultRecord>> {
    let start = Instant::now();
    let dim = setting.regime_dim();
    let ambient = setting.ambient_dim();
    let metric = setting.metric();
    let radii: Vec<f64> = config.r_grid.iter().map(|&r| regime_radius(r, n, dim)).collect();
    let per_trial: Vec<Vec<TrialStats>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let cloud = setting.sample(config.process, n, trial_seed(config.master_seed, t))?;
            trial_stats(&cloud, &metric, &radii, n, config, ambient).map_err(|e| {
                log::error!("trial {t} of {} aborted: {e}", config.name);
                e
            })
        })
        .collect::<Result<_>>()?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(config
        .r_grid
        .iter()
        .zip(&radii)
        .enumerate()
        .map(|(i, (&r, &r_n))| {
            let trials = per_trial.iter().map(|t| t[i].clone()).collect();
            let mut rec = ResultRecord::aggregate(n, r, r_n, trials, config.master_seed);
            rec.wall_time_s = elapsed;
            rec
        })
        .collect())
}

/// Records of `run_lln_curve` at each `n` of an increasing list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_list: Vec<usize>,
    pub records: Vec<Vec<ResultRecord>>,
}

impl ConvergenceReport {
    /// Standard errors of `β_k/n` at grid radius index `ri`, one per `n`.
    pub fn betti_stderr_trend(&self, ri: usize, k: usize) -> Vec<f64> {
        self.records.iter().map(|recs| recs[ri].betti[k].stderr).collect()
    }

    /// Whether those standard errors decrease strictly with `n`.
    pub fn dispersion_decreases(&self, ri: usize, k: usize) -> bool {
        self.betti_stderr_trend(ri, k).windows(2).all(|w| w[1] < w[0])
    }
}

pub fn run_convergence(config: &ExperimentConfig, n_list: &[usize]) -> Result<ConvergenceReport> {
    config.validate()?;
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::InvalidArgument("n-list must be positive and strictly increasing".into()));
    }
    let setting = Setting::from_config(&config.setting)?;
    let records = n_list.iter().map(|&n| run_with_setting(config, &setting, n)).collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { n_list: n_list.to_vec(), records })
}

/// `β_k / L` estimates for a homogeneous process, with the alternating sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaHatEstimate {
    pub dim: usize,
    pub lambda: f64,
    pub r: f64,
    pub volume: f64,
    /// One entry per `k = 0..dim`.
    pub betti: Vec<LimitEstimate>,
    /// `Σ_k (−1)^k β_k / L`.
    pub euler: LimitEstimate,
}

/// Estimates `β̂_k^{(N)}(λ, r)` for `k < N` from a homogeneous Poisson process
/// in the cube of volume `volume` centred at the origin.
pub fn estimate_beta_hat(
    dim: usize,
    lambda: f64,
    r: f64,
    volume: f64,
    trials: usize,
    seed: u64,
) -> Result<BetaHatEstimate> {
    estimate_beta_hat_with(dim, lambda, r, volume, trials, seed, DEFAULT_SIMPLEX_CAP)
}

pub fn estimate_beta_hat_with(
    dim: usize,
    lambda: f64,
    r: f64,
    volume: f64,
    trials: usize,
    seed: u64,
    simplex_cap: usize,
) -> Result<BetaHatEstimate> {
    if trials == 0 || dim == 0 || !(r > 0.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidArgument("need trials ≥ 1, N ≥ 1, r > 0, λ ≥ 0".into()));
    }
    if lambda > 0.0 && lambda * volume < 10.0 {
        return Err(Error::InvalidArgument(format!("λ·L = {} is below 10", lambda * volume)));
    }
    let window = centered_window(dim, volume)?;
    let metric = MetricSpec::euclidean(dim);
    let rows: Vec<(Vec<f64>, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cloud = sample_homogeneous(lambda, &window, trial_seed(seed, t))?;
            let complex = cech_filtration_with(&cloud, &metric, dim, r, BuildOptions { simplex_cap })?;
            let persistence = Persistence::compute(&complex, dim);
            let betti: Vec<f64> = (0..dim).map(|k| persistence.unpaired_count(k) as f64 / volume).collect();
            let euler = betti.iter().enumerate().map(|(k, b)| if k % 2 == 0 { *b } else { -*b }).sum();
            Ok((betti, euler))
        })
        .collect::<Result<_>>()?;
    let betti =
        (0..dim).map(|k| LimitEstimate::from_samples(&rows.iter().map(|r| r.0[k]).collect::<Vec<_>>())).collect();
    let euler = LimitEstimate::from_samples(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok(BetaHatEstimate { dim, lambda, r, volume, betti, euler })
}

/// Per-trial coupling gap between `X_n` and `P_n` built from the same seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTrial {
    pub seed: u64,
    /// `N_n`.
    pub poisson_count: usize,
    /// `|S_j(X_n) − S_j(P_n)| / n`.
    pub gap: f64,
    /// Largest number of j-simplices through one vertex of the larger cloud.
    pub max_degree: usize,
}

impl CouplingTrial {
    /// `gap ≤ (|N_n − n| / n) · max_degree`.
    pub fn within_structural_bound(&self, n: usize) -> bool {
        self.gap <= self.poisson_count.abs_diff(n) as f64 / n as f64 * self.max_degree as f64 + 1e-15
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    pub n: usize,
    pub r: f64,
    pub j: usize,
    pub trials: Vec<CouplingTrial>,
    pub mean_gap: LimitEstimate,
}

/// Simplex-count gap of the Poissonization coupling at each `n` and grid radius.
pub fn run_coupling_gap(config: &ExperimentConfig, n_list: &[usize], j: usize) -> Result<Vec<CouplingRecord>> {
    config.validate()?;
    let setting = Setting::from_config(&config.setting)?;
    let mut out = Vec::new();
    for &n in n_list {
        let per_trial: Vec<Vec<CouplingTrial>> = (0..config.trials)
            .into_par_iter()
            .map(|t| coupling_with_setting(config, &setting, n, j, trial_seed(config.master_seed, t)))
            .collect::<Result<_>>()?;
        for (i, &r) in config.r_grid.iter().enumerate() {
            let trials: Vec<CouplingTrial> = per_trial.iter().map(|t| t[i].clone()).collect();
            let mean_gap = LimitEstimate::from_samples(&trials.iter().map(|t| t.gap).collect::<Vec<_>>());
            out.push(CouplingRecord { n, r, j, trials, mean_gap });
        }
    }
    Ok(out)
}

/// Coupling gap of the single trial drawn from `seed`, one entry per grid radius.
pub fn coupling_trial(config: &ExperimentConfig, n: usize, j: usize, seed: u64) -> Result<Vec<CouplingTrial>> {
    config.validate()?;
    coupling_with_setting(config, &Setting::from_config(&config.setting)?, n, j, seed)
}

fn coupling_with_setting(
    config: &ExperimentConfig,
    setting: &Setting,
    n: usize,
    j: usize,
    seed: u64,
) -> Result<Vec<CouplingTrial>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let dim = setting.regime_dim();
    let radii: Vec<f64> = config.r_grid.iter().map(|&r| regime_radius(r, n, dim)).collect();
    let count = poissonized_count(n, seed);
    // X_n and P_n are both prefixes of the larger cloud.
    let big = setting.sample(ProcessKind::Binomial, n.max(count), seed)?;
    let r_max = *radii.last().expect("nonempty grid");
    let filtration =
        cech_filtration_with(&big, &setting.metric(), j, r_max, BuildOptions { simplex_cap: config.simplex_cap })?;
    Ok(radii.iter().map(|&t| prefix_gap(&filtration, j, t, n, count, seed)).collect())
}

/// Counts, at threshold `t`, the j-simplices of the larger cloud that use a
/// vertex beyond the smaller cloud's prefix.
fn prefix_gap(filtration: &SimplicialComplex, j: usize, t: f64, n: usize, count: usize, seed: u64) -> CouplingTrial {
    let small = n.min(count) as u32;
    let mut degree = vec![0usize; filtration.num_vertices()];
    let mut differing = 0usize;
    if let Some(layer) = filtration.layer(j) {
        for (s, v) in layer.iter() {
            if v > t {
                continue;
            }
            for &x in s {
                degree[x as usize] += 1;
            }
            if *s.last().expect("nonempty") >= small {
                differing += 1;
            }
        }
    }
    let max_degree = degree.iter().skip(small as usize).copied().max().unwrap_or(0);
    CouplingTrial { seed, poisson_count: count, gap: differing as f64 / n as f64, max_degree }
}

/// Mean `S_j/n` per grid radius: estimates of `A_j^{(N)}(r) ∫ f^{j+1}/D^j`.
pub fn estimate_expected_simplex_limit(config: &ExperimentConfig, j: usize) -> Result<Vec<LimitEstimate>> {
    let mut cfg = config.clone();
    cfg.k_max = cfg.k_max.max(j.saturating_sub(1));
    let records = run_lln_curve(&cfg)?;
    records
        .iter()
        .map(|r| r.simplices.get(j).copied().ok_or_else(|| Error::InvalidArgument(format!("S_{j} not recorded"))))
        .collect()
}

/// Checks the Betti difference bound between consecutive grid radii of each
/// trial; returns the number of (trial, pair, k) checks and violations.
pub fn nested_bound_checks(config: &ExperimentConfig, trials: usize) -> Result<(usize, usize)> {
    config.validate()?;
    let setting = Setting::from_config(&config.setting)?;
    let dim = setting.regime_dim();
    let metric = setting.metric();
    let radii: Vec<f64> = config.r_grid.iter().map(|&r| regime_radius(r, config.n, dim)).collect();
    let r_max = *radii.last().expect("nonempty grid");
    let build = config.k_max + 1;
    let mut checks = 0;
    let mut violations = 0;
    for t in 0..trials {
        let cloud = setting.sample(config.process, config.n, trial_seed(config.master_seed, t))?;
        let filtration =
            cech_filtration_with(&cloud, &metric, build, r_max, BuildOptions { simplex_cap: config.simplex_cap })?;
        for w in radii.windows(2) {
            let (a, b) = (filtration.threshold(w[0]), filtration.threshold(w[1]));
            for k in 0..=config.k_max {
                let (_, _, holds) = betti_diff_bound_check(&a, &b, k)?;
                checks += 1;
                violations += usize::from(!holds);
            }
        }
    }
    Ok((checks, violations))
}
