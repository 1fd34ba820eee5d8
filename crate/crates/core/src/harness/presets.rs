//! Pinned parameters of the reference experiments and their pass bands.

use serde::{Deserialize, Serialize};

use super::{estimate_beta_hat, ExperimentConfig, MetricConfig, ProcessKind, ResultRecord, SettingConfig};
use crate::cech::DEFAULT_SIMPLEX_CAP;
use crate::error::{Error, Result};
use crate::geometry::AtlasConfig;
use crate::limits::{euler_limit, LimitEstimate};
use crate::sampling::DensityConfig;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Figure2Plane,
    Figure2Space,
    CircleBeta0,
    ScalingCheck,
}

impl Preset {
    pub const ALL: [Preset; 4] =
        [Preset::Figure2Plane, Preset::Figure2Space, Preset::CircleBeta0, Preset::ScalingCheck];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Figure2Plane => "figure2-2d",
            Preset::Figure2Space => "figure2-3d",
            Preset::CircleBeta0 => "circle-beta0",
            Preset::ScalingCheck => "scaling-check",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{name}'")))
    }

    /// Experiment configuration of the LLN presets; `None` for `scaling-check`.
    pub fn config(self) -> Option<ExperimentConfig> {
        let cube = |dim: usize| SettingConfig::Euclidean {
            density: DensityConfig::UniformBox { lo: vec![0.0; dim], hi: vec![1.0; dim] },
            metric: MetricConfig::Euclidean,
        };
        let base = |setting, r_grid: Vec<f64>, k_max, euler| ExperimentConfig {
            name: self.name().to_string(),
            setting,
            process: ProcessKind::Binomial,
            n: 10_000,
            r_grid,
            trials: 20,
            k_max,
            euler,
            master_seed: DEFAULT_SEED,
            simplex_cap: DEFAULT_SIMPLEX_CAP,
        };
        match self {
            Preset::Figure2Plane => Some(base(cube(2), vec![0.3, 0.6, 1.0], 1, true)),
            Preset::Figure2Space => Some(base(cube(3), vec![0.3, 0.5], 2, true)),
            Preset::CircleBeta0 => Some(base(
                SettingConfig::Manifold { atlas: AtlasConfig::preset("circle").expect("built-in atlas") },
                vec![1.0],
                1,
                false,
            )),
            Preset::ScalingCheck => None,
        }
    }
}

/// One comparison against a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub label: String,
    pub observed: f64,
    pub stderr: f64,
    pub target: f64,
    /// Allowed `|observed − target|` (or upper bound when `one_sided`).
    pub band: f64,
    pub one_sided: bool,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn two_sided(label: String, observed: &LimitEstimate, target: f64, band: f64) -> Self {
        let passed = (observed.value - target).abs() <= band;
        Self { label, observed: observed.value, stderr: observed.stderr, target, band, one_sided: false, passed }
    }

    pub fn at_most(label: String, observed: &LimitEstimate, bound: f64) -> Self {
        let passed = observed.value <= bound;
        Self {
            label,
            observed: observed.value,
            stderr: observed.stderr,
            target: bound,
            band: 0.0,
            one_sided: true,
            passed,
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        if self.one_sided {
            format!(
                "{verdict} {}: observed {:.6} (stderr {:.2e}) <= {:.3e}",
                self.label, self.observed, self.stderr, self.target
            )
        } else {
            format!(
                "{verdict} {}: observed {:.6} (stderr {:.2e}) target {:.6} |diff| {:.2e} band {:.2e}",
                self.label,
                self.observed,
                self.stderr,
                self.target,
                (self.observed - self.target).abs(),
                self.band
            )
        }
    }
}

/// Band checks of an LLN preset run.
pub fn check_lln(preset: Preset, records: &[ResultRecord]) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for rec in records {
        match preset {
            Preset::Figure2Plane | Preset::Figure2Space => {
                let (dim, floor) = if preset == Preset::Figure2Plane { (2, 0.02) } else { (3, 0.03) };
                let est = rec.euler.as_ref().ok_or_else(|| Error::InvalidArgument("run did not record χ/n".into()))?;
                let band = f64::max(floor, 4.0 * est.stderr);
                out.push(CheckOutcome::two_sided(
                    format!("chi/n N={dim} r={}", rec.r),
                    est,
                    euler_limit(dim, rec.r)?,
                    band,
                ));
            }
            Preset::CircleBeta0 => {
                let b0 = &rec.betti[0];
                let target = (-rec.r / std::f64::consts::PI).exp();
                out.push(CheckOutcome::two_sided(
                    format!("beta0/n circle r={}", rec.r),
                    b0,
                    target,
                    f64::max(0.01, 4.0 * b0.stderr),
                ));
                if let Some(b1) = rec.betti.get(1) {
                    out.push(CheckOutcome::at_most(format!("beta1/n circle r={}", rec.r), b1, 2e-4));
                }
            }
            Preset::ScalingCheck => return Err(Error::InvalidArgument("scaling-check is not an LLN preset".into())),
        }
    }
    Ok(out)
}

/// Scaling property in the plane: `β̂_k(1, 0.5)` against `β̂_k(4, 0.25)/4`
/// for `k ∈ {0, 1}` within 3 combined stderr, each from a window of volume `volume`.
pub fn run_scaling_check(volume: f64, trials: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let base = estimate_beta_hat(2, 1.0, 0.5, volume, trials, seed)?;
    let scaled = estimate_beta_hat(2, 4.0, 0.25, volume, trials, seed ^ 0x5ca1_ed00)?;
    Ok((0..2)
        .map(|k| {
            let a = base.betti[k];
            let b = LimitEstimate {
                value: scaled.betti[k].value / 4.0,
                stderr: scaled.betti[k].stderr / 4.0,
                ..scaled.betti[k]
            };
            let band = 3.0 * a.stderr.hypot(b.stderr);
            CheckOutcome::two_sided(format!("beta_hat_{k}(1,0.5) vs beta_hat_{k}(4,0.25)/4"), &a, b.value, band)
        })
        .collect())
}
