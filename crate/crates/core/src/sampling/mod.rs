//! Binomial, Poissonized, homogeneous and manifold point processes.
//!
//! The binomial process `X_n` is the first `n` points of an i.i.d. stream
//! drawn from the point stream of a seed. The Poissonized process `P_n` takes
//! its count `N_n ~ Poisson(n)` from a separate count stream and then reads
//! the first `N_n` points of the *same* point stream, so `X_n` and `P_n` share
//! their first `min(n, N_n)` points bit for bit.

mod cloud;
mod density;
pub mod poisson;

pub use cloud::{PointCloud, ProcessTag, BINARY_MAGIC};
pub use density::{DensityConfig, DensitySpec};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{ChartAtlas, ParamBox};
use crate::rng::{self, StreamRng, COUNT_STREAM, POINT_STREAM};
use crate::tolerances::TOLERANCES;

/// Tracks the rejection acceptance rate over the first probe batch.
struct AcceptanceMonitor {
    proposals: usize,
    accepted: usize,
    checked: bool,
}

impl AcceptanceMonitor {
    fn new() -> Self {
        Self { proposals: 0, accepted: 0, checked: false }
    }

    fn record(&mut self, accepted: bool) -> Result<()> {
        self.proposals += 1;
        self.accepted += usize::from(accepted);
        if !self.checked && self.proposals >= TOLERANCES.acceptance_probe {
            self.checked = true;
            let rate = self.accepted as f64 / self.proposals as f64;
            if rate < TOLERANCES.min_acceptance {
                return Err(Error::EnvelopeTooLoose { rate, trials: self.proposals });
            }
        }
        Ok(())
    }
}

fn uniform_in(rng: &mut StreamRng, b: &ParamBox, out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = b.lo[i] + (b.hi[i] - b.lo[i]) * rng.random::<f64>();
    }
}

/// Endless i.i.d. stream of points from a density.
struct DensityStream<'a> {
    density: &'a DensitySpec,
    rng: StreamRng,
    monitor: AcceptanceMonitor,
}

impl<'a> DensityStream<'a> {
    fn new(density: &'a DensitySpec, seed: u64) -> Self {
        Self { density, rng: rng::stream(seed, POINT_STREAM), monitor: AcceptanceMonitor::new() }
    }

    fn next_into(&mut self, out: &mut [f64]) -> Result<()> {
        match self.density {
            DensitySpec::UniformBox(b) => {
                uniform_in(&mut self.rng, b, out);
                Ok(())
            }
            DensitySpec::Callable { f, support, sup_bound, .. } => loop {
                uniform_in(&mut self.rng, support, out);
                let v = f(out);
                if v > *sup_bound {
                    return Err(Error::InvalidDensity(format!("f = {v} exceeds sup-bound {sup_bound}")));
                }
                let accept = self.rng.random::<f64>() * sup_bound < v;
                self.monitor.record(accept)?;
                if accept {
                    return Ok(());
                }
            },
        }
    }

    fn take(&mut self, n: usize) -> Result<Vec<f64>> {
        let d = self.density.dim();
        let mut coords = vec![0.0; n * d];
        for chunk in coords.chunks_exact_mut(d) {
            self.next_into(chunk)?;
        }
        Ok(coords)
    }
}

fn check_density(density: &DensitySpec) -> Result<()> {
    if let DensitySpec::Callable { sup_bound, .. } = density {
        if !(*sup_bound > 0.0 && sup_bound.is_finite()) {
            return Err(Error::InvalidDensity(format!("sup-bound {sup_bound} must be positive")));
        }
    }
    if !(density.support().volume() > 0.0) {
        return Err(Error::InvalidDensity("empty support".into()));
    }
    Ok(())
}

/// `X_n`: `n` i.i.d. points with density `f`.
pub fn sample_binomial(density: &DensitySpec, n: usize, seed: u64) -> Result<PointCloud> {
    check_density(density)?;
    let coords = DensityStream::new(density, seed).take(n)?;
    PointCloud::new(density.dim(), coords, seed, ProcessTag::Binomial)
}

/// `P_n`: the first `N_n ~ Poisson(n)` points of the stream `sample_binomial` reads.
/// Returns the cloud and `N_n`.
pub fn sample_poissonized(density: &DensitySpec, n: usize, seed: u64) -> Result<(PointCloud, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Poissonized process needs n ≥ 1".into()));
    }
    check_density(density)?;
    let count = poissonized_count(n, seed);
    let coords = DensityStream::new(density, seed).take(count)?;
    Ok((PointCloud::new(density.dim(), coords, seed, ProcessTag::Poissonized)?, count))
}

/// `N_n` for a seed, without drawing any points.
pub fn poissonized_count(n: usize, seed: u64) -> usize {
    poisson::poisson(&mut rng::stream(seed, COUNT_STREAM), n as f64) as usize
}

/// Homogeneous Poisson process of intensity `lambda` restricted to `window`.
pub fn sample_homogeneous(lambda: f64, window: &ParamBox, seed: u64) -> Result<PointCloud> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("intensity {lambda} must be finite and nonnegative")));
    }
    let volume = window.volume();
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::InvalidArgument("window volume must be finite and positive".into()));
    }
    let count = poisson::poisson(&mut rng::stream(seed, COUNT_STREAM), lambda * volume) as usize;
    let density = DensitySpec::UniformBox(window.clone());
    let coords = DensityStream::new(&density, seed).take(count)?;
    PointCloud::new(window.dim(), coords, seed, ProcessTag::Homogeneous)
}

/// `((−L/2)^{1/N}, (L/2)^{1/N}]^N`-style window of volume `volume`: the cube of
/// that volume centred at the origin.
pub fn centered_window(dim: usize, volume: f64) -> Result<ParamBox> {
    if !(volume > 0.0) || dim == 0 {
        return Err(Error::InvalidArgument("window needs positive volume and dimension".into()));
    }
    let half = volume.powf(1.0 / dim as f64) / 2.0;
    ParamBox::cube(dim, -half, half)
}

/// `Z_n` (or `Q_n` when `poissonized`) on a manifold, returned in ambient coordinates.
pub fn sample_manifold(atlas: &ChartAtlas, n: usize, seed: u64, poissonized: bool) -> Result<PointCloud> {
    if (atlas.total_mass() - 1.0).abs() > TOLERANCES.quadrature_mass {
        return Err(Error::InvalidDensity(format!("κ integrates to {}", atlas.total_mass())));
    }
    let count = if poissonized {
        if n == 0 {
            return Err(Error::InvalidArgument("Poissonized process needs n ≥ 1".into()));
        }
        poissonized_count(n, seed)
    } else {
        n
    };
    let masses = atlas.piece_masses();
    let total: f64 = masses.iter().sum();
    let mut rng = rng::stream(seed, POINT_STREAM);
    let mut monitor = AcceptanceMonitor::new();
    let ambient = atlas.ambient_dim();
    let mut coords = Vec::with_capacity(count * ambient);
    let mut x = vec![0.0; atlas.manifold_dim()];
    for _ in 0..count {
        let mut pick = rng.random::<f64>() * total;
        let mut piece = masses.len() - 1;
        for (i, m) in masses.iter().enumerate() {
            if pick < *m {
                piece = i;
                break;
            }
            pick -= m;
        }
        let AtlasPieceRef { region, chart } = piece_ref(atlas, piece);
        let envelope = atlas.envelope(piece);
        loop {
            uniform_in(&mut rng, region, &mut x);
            let u = rng.random::<f64>();
            let accepted = if chart.in_domain(&x) {
                let z = chart.map_unchecked(&x);
                let target = atlas.kappa(&z) * chart.jacobian_density_unchecked(&x).unwrap_or(0.0);
                if target > envelope {
                    return Err(Error::InvalidDensity(format!(
                        "κ·D = {target} exceeds envelope {envelope} on piece {piece}"
                    )));
                }
                if u * envelope < target {
                    coords.extend_from_slice(&z);
                    true
                } else {
                    false
                }
            } else {
                false
            };
            monitor.record(accepted)?;
            if accepted {
                break;
            }
        }
    }
    PointCloud::new(ambient, coords, seed, ProcessTag::Manifold)
}

struct AtlasPieceRef<'a> {
    region: &'a ParamBox,
    chart: &'a crate::geometry::Chart,
}

fn piece_ref(atlas: &ChartAtlas, piece: usize) -> AtlasPieceRef<'_> {
    let p = &atlas.pieces()[piece];
    AtlasPieceRef { region: &p.region, chart: &atlas.charts()[p.chart] }
}
