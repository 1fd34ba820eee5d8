use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ParamBox;
use crate::rng;

/// Sampling density f on ℝᴺ.
#[derive(Clone)]
pub enum DensitySpec {
    /// Uniform on a box.
    UniformBox(ParamBox),
    /// `f` on `support`, bounded above by `sup_bound`; sampled by rejection.
    Callable { name: String, f: crate::geometry::ScalarField, support: ParamBox, sup_bound: f64 },
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::UniformBox(b) => write!(f, "UniformBox({:?}..{:?})", b.lo, b.hi),
            DensitySpec::Callable { name, support, sup_bound, .. } => {
                write!(f, "Callable({name} on {:?}..{:?}, M={sup_bound})", support.lo, support.hi)
            }
        }
    }
}

impl DensitySpec {
    pub fn unit_cube(dim: usize) -> Self {
        DensitySpec::UniformBox(ParamBox::cube(dim, 0.0, 1.0).expect("unit cube"))
    }

    pub fn callable(
        name: impl Into<String>,
        support: ParamBox,
        sup_bound: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DensitySpec::Callable { name: name.into(), f: Arc::new(f), support, sup_bound }
    }

    pub fn dim(&self) -> usize {
        self.support().dim()
    }

    pub fn support(&self) -> &ParamBox {
        match self {
            DensitySpec::UniformBox(b) => b,
            DensitySpec::Callable { support, .. } => support,
        }
    }

    /// f(x); zero outside the support.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            DensitySpec::UniformBox(b) => {
                if b.contains(x) {
                    1.0 / b.volume()
                } else {
                    0.0
                }
            }
            DensitySpec::Callable { f, support, .. } => {
                if support.contains(x) {
                    f(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Checks the sup-bound and spot-checks `0 ≤ f ≤ M` at `probes` uniform points.
    pub fn validate(&self, probes: usize) -> Result<()> {
        let DensitySpec::Callable { f, support, sup_bound, .. } = self else {
            return Ok(());
        };
        if !(*sup_bound > 0.0 && sup_bound.is_finite()) {
            return Err(Error::InvalidDensity(format!("sup-bound {sup_bound} must be positive")));
        }
        let mut r = rng::stream(rng::derive_seed(0, &[0x6465_6e73]), 0);
        let mut x = vec![0.0; support.dim()];
        for _ in 0..probes {
            for (i, slot) in x.iter_mut().enumerate() {
                *slot = support.lo[i] + (support.hi[i] - support.lo[i]) * r.random::<f64>();
            }
            let v = f(&x);
            if !(v >= 0.0) || v > *sup_bound {
                return Err(Error::InvalidDensity(format!("f({x:?}) = {v} outside [0, {sup_bound}]")));
            }
        }
        Ok(())
    }
}

/// Density identifiers usable from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityConfig {
    /// Uniform on `[lo, hi]` per axis.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Product density `∏ 2 x_i` on the unit cube.
    Linear { dim: usize },
    /// Truncated isotropic Gaussian on `[0,1]^dim` centred at 1/2 with std `sigma`, normalized numerically.
    TruncatedGaussian { dim: usize, sigma: f64 },
}

impl DensityConfig {
    pub fn build(&self) -> Result<DensitySpec> {
        match self {
            DensityConfig::UniformBox { lo, hi } => Ok(DensitySpec::UniformBox(ParamBox::new(lo.clone(), hi.clone())?)),
            DensityConfig::Linear { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidDensity("dimension must be positive".into()));
                }
                Ok(DensitySpec::callable(
                    format!("linear{dim}"),
                    ParamBox::cube(*dim, 0.0, 1.0)?,
                    2f64.powi(*dim as i32),
                    |x: &[f64]| x.iter().map(|v| 2.0 * v).product(),
                ))
            }
            DensityConfig::TruncatedGaussian { dim, sigma } => {
                if *dim == 0 || !(*sigma > 0.0) {
                    return Err(Error::InvalidDensity("need positive dimension and sigma".into()));
                }
                // One-dimensional normalizer on [0,1] by midpoint rule, raised to the dimension.
                let s = *sigma;
                let cells = 100_000;
                let z1: f64 = (0..cells)
                    .map(|i| {
                        let t = (i as f64 + 0.5) / cells as f64 - 0.5;
                        (-t * t / (2.0 * s * s)).exp()
                    })
                    .sum::<f64>()
                    / cells as f64;
                let norm = z1.powi(*dim as i32);
                Ok(DensitySpec::callable(
                    format!("gauss{dim}({s})"),
                    ParamBox::cube(*dim, 0.0, 1.0)?,
                    1.0 / norm,
                    move |x: &[f64]| {
                        let r2: f64 = x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
                        (-r2 / (2.0 * s * s)).exp() / norm
                    },
                ))
            }
        }
    }
}
