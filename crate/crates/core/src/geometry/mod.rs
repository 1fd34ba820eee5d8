//! Metrics, charts and atlases.
//!
//! Every metric the library supports is reduced to plain Euclidean geometry
//! before a complex is built: weighted norms by [`whiten`], chart-induced
//! metrics by [`Chart::embed`].

mod atlas;
mod chart;
mod metric;

pub use atlas::{AtlasConfig, AtlasPiece, ChartAtlas, KappaConfig, ManifoldDensity, PieceConfig, Quadrature};
pub use chart::{Chart, ChartConfig, ChartKind, ParamBox};
pub use metric::{distance, metric_ratio_probe, whiten, MetricSpec};

/// Real-valued function of a point, shared between threads.
pub type ScalarField = std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Parameter-to-ambient map of a user-supplied chart.
pub type ChartMap = std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Euclidean distance between two equal-length slices.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Volume of the unit ball in dimension `m`, `π^{m/2} / Γ(m/2 + 1)`.
pub fn unit_ball_volume(m: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(m/2 + 1) by the half-integer recursion; exact for every m.
    let mut gamma = if m.is_multiple_of(2) { 1.0 } else { PI.sqrt() / 2.0 };
    let mut x = if m.is_multiple_of(2) { 1.0 } else { 1.5 };
    let target = m as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    PI.powf(m as f64 / 2.0) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        let expected = [1.0, 2.0, PI, 4.0 * PI / 3.0, PI * PI / 2.0, 8.0 * PI * PI / 15.0];
        for (m, e) in expected.iter().enumerate() {
            assert!((unit_ball_volume(m) - e).abs() < 1e-12, "m={m}");
        }
    }
}
