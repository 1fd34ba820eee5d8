//! Closed forms and Monte Carlo estimators for the limiting constants of the
//! thermodynamic regime.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cech::Miniball;
use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, ChartAtlas, Quadrature};
use crate::rng;

/// Minimum Monte Carlo sample count for `A_j` with `j ≥ 2`.
pub const MIN_MC_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    ClosedForm,
    MonteCarlo,
}

/// A limiting constant with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub method: EstimateMethod,
}

impl LimitEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0, samples: 0, method: EstimateMethod::ClosedForm }
    }

    /// Mean and standard error of the mean of `xs`.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = if n == 0 { 0.0 } else { xs.iter().sum::<f64>() / n as f64 };
        let stderr = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        };
        Self { value: mean, stderr, samples: n, method: EstimateMethod::MonteCarlo }
    }
}

/// `A_j^{(N)}(r) = r^{Nj}/(j+1)! ∫ h_j(0, x) dx`, where `h_j(0, x) = 1` iff
/// `{0, x_1, …, x_j}` has a smallest enclosing ball of radius ≤ 1.
///
/// `j = 1` uses the closed form `2^{N−1} ω_N r^N`; larger `j` are estimated by
/// Monte Carlo over `B(0, 2)^j`.
pub fn a_j_constant(dim: usize, j: usize, r: f64, mc_samples: usize, seed: u64) -> Result<LimitEstimate> {
    check_dim_j(dim, j, r)?;
    if j == 1 {
        return Ok(LimitEstimate::exact(2f64.powi(dim as i32 - 1) * unit_ball_volume(dim) * r.powi(dim as i32)));
    }
    a_j_monte_carlo(dim, j, r, mc_samples, seed)
}

/// Monte Carlo route for any `j ≥ 1` (used to cross-check the closed form).
pub fn a_j_monte_carlo(dim: usize, j: usize, r: f64, mc_samples: usize, seed: u64) -> Result<LimitEstimate> {
    check_dim_j(dim, j, r)?;
    if mc_samples < MIN_MC_SAMPLES {
        return Err(Error::InsufficientSamples { got: mc_samples, min: MIN_MC_SAMPLES });
    }
    let mut rng = rng::stream(seed, 0);
    let mut ball = Miniball::new(dim);
    let mut pts = vec![0.0; (j + 1) * dim];
    let mut hits = 0usize;
    for _ in 0..mc_samples {
        for p in 1..=j {
            uniform_in_ball(&mut rng, 2.0, &mut pts[p * dim..(p + 1) * dim]);
        }
        let refs: Vec<&[f64]> = pts.chunks_exact(dim).collect();
        if ball.radius(&refs) <= 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / mc_samples as f64;
    let scale = unit_ball_volume(dim) * 2f64.powi(dim as i32);
    let factor = scale.powi(j as i32) * r.powi((dim * j) as i32) / factorial(j + 1);
    let stderr = (p * (1.0 - p) / (mc_samples - 1) as f64).sqrt();
    Ok(LimitEstimate {
        value: factor * p,
        stderr: factor * stderr,
        samples: mc_samples,
        method: EstimateMethod::MonteCarlo,
    })
}

fn check_dim_j(dim: usize, j: usize, r: f64) -> Result<()> {
    if dim == 0 || j == 0 {
        return Err(Error::InvalidArgument("need N ≥ 1 and j ≥ 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    Ok(())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn uniform_in_ball<R: Rng>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let d = out.len();
    let mut norm = 0.0;
    for slot in out.iter_mut() {
        *slot = StandardNormal.sample(rng);
        norm += *slot * *slot;
    }
    let scale = radius * rng.random::<f64>().powf(1.0 / d as f64) / norm.sqrt();
    out.iter_mut().for_each(|v| *v *= scale);
}

/// `Ŝ_j^{(N)}(λ, r) = A_j^{(N)}(r) λ^{j+1}`.
pub fn s_hat_limit(a_j: &LimitEstimate, j: usize, lambda: f64) -> LimitEstimate {
    let f = lambda.powi(j as i32 + 1);
    LimitEstimate { value: a_j.value * f, stderr: a_j.stderr * f, ..*a_j }
}

/// Limiting Euler characteristic per unit volume at intensity 1:
/// `(1 − πr²) e^{−πr²}` for N = 2 and `(π⁴r⁶/6 − 4πr³ + 1) e^{−4πr³/3}` for N = 3.
pub fn euler_limit(dim: usize, r: f64) -> Result<f64> {
    match dim {
        2 => {
            let a = PI * r * r;
            Ok((1.0 - a) * (-a).exp())
        }
        3 => {
            let r3 = r * r * r;
            Ok((PI.powi(4) * r3 * r3 / 6.0 - 4.0 * PI * r3 + 1.0) * (-4.0 * PI * r3 / 3.0).exp())
        }
        other => Err(Error::Unsupported(format!("Euler characteristic limit for N = {other}"))),
    }
}

/// Components per unit length of the radius-`r` Čech complex of a homogeneous
/// Poisson process of intensity `λ` on the line: `λ e^{−2λr}`.
pub fn beta0_limit_1d(lambda: f64, r: f64) -> f64 {
    lambda * (-2.0 * lambda * r).exp()
}

/// `(λθ, r θ^{−1/m}, 1/θ)`: `β̂(λ, r) = factor · β̂(λ′, r′)`.
pub fn scaling_map(lambda: f64, r: f64, theta: f64, m: usize) -> Result<(f64, f64, f64)> {
    if !(theta > 0.0) || m == 0 {
        return Err(Error::InvalidArgument("need θ > 0 and m ≥ 1".into()));
    }
    Ok((lambda * theta, r * theta.powf(-1.0 / m as f64), 1.0 / theta))
}

/// `c (ω_m r)^{mk} e^{−(ω_m r)^m}`.
pub fn decay_envelope(m: usize, k: usize, r: f64, c: f64) -> Result<f64> {
    if m == 0 || k >= m {
        return Err(Error::InvalidArgument(format!("need 0 ≤ k < m, got k = {k}, m = {m}")));
    }
    let u = (unit_ball_volume(m) * r).powi(m as i32);
    Ok(c * u.powi(k as i32) * (-u).exp())
}

/// `Σ_i ∫_{C_i} g(κ(φ_i(x))) D_φi(x) dx`; logs a warning when the two grid
/// resolutions disagree.
pub fn manifold_limit_integral(atlas: &ChartAtlas, g: &dyn Fn(f64) -> f64) -> Result<Quadrature> {
    let q = atlas.integrate(g)?;
    if !q.is_resolved() {
        log::warn!(
            "manifold quadrature on {} changed by {:.2e} between grids; result may be under-resolved",
            atlas.name(),
            q.relative_change()
        );
    }
    Ok(q)
}

/// One row of a limit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub m: usize,
    pub k: usize,
    pub lambda: f64,
    pub r: f64,
    pub estimate: LimitEstimate,
}

/// CSV `m,k,lambda,r,value,stderr,samples`.
pub fn write_limit_table<W: Write>(mut w: W, rows: &[LimitRow]) -> Result<()> {
    writeln!(w, "m,k,lambda,r,value,stderr,samples")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{:?},{:?},{:?},{:?},{}",
            row.m, row.k, row.lambda, row.r, row.estimate.value, row.estimate.stderr, row.estimate.samples
        )?;
    }
    Ok(())
}
