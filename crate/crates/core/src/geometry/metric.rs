use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::chart::Chart;
use super::euclidean;
use crate::error::{Error, Result};
use crate::rng;
use crate::sampling::PointCloud;

/// A metric on the space the point cloud lives in.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    /// `‖y − z‖` in ℝᴺ.
    Euclidean { dim: usize },
    /// `‖B(y − z)‖` for a symmetric positive definite `B`.
    WeightedNorm { matrix: DMatrix<f64> },
    /// `‖φ(y) − φ(z)‖` on parameters of a chart.
    ChartInduced { chart: Arc<Chart> },
}

impl MetricSpec {
    pub fn euclidean(dim: usize) -> Self {
        MetricSpec::Euclidean { dim }
    }

    /// Validates symmetry and positive definiteness (via Cholesky).
    pub fn weighted(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("weight matrix must be square and nonempty".into()));
        }
        let scale = matrix.abs().max().max(1.0);
        if (&matrix - matrix.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::InvalidArgument("weight matrix is not symmetric".into()));
        }
        if matrix.clone().cholesky().is_none() {
            return Err(Error::InvalidArgument("weight matrix is not positive definite".into()));
        }
        Ok(MetricSpec::WeightedNorm { matrix })
    }

    pub fn chart(chart: Chart) -> Self {
        MetricSpec::ChartInduced { chart: Arc::new(chart) }
    }

    /// Dimension of the points the metric accepts (parameter dimension for charts).
    pub fn input_dim(&self) -> usize {
        match self {
            MetricSpec::Euclidean { dim } => *dim,
            MetricSpec::WeightedNorm { matrix } => matrix.nrows(),
            MetricSpec::ChartInduced { chart } => chart.param_dim(),
        }
    }

    /// Dimension of the Euclidean space complexes are built in.
    pub fn working_dim(&self) -> usize {
        match self {
            MetricSpec::ChartInduced { chart } => chart.ambient_dim(),
            other => other.input_dim(),
        }
    }

    /// Maps a flat coordinate buffer into working coordinates, where the
    /// metric is plain Euclidean distance.
    pub fn working_coordinates(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let d = self.input_dim();
        if !coords.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!("coordinate buffer not a multiple of {d}")));
        }
        match self {
            MetricSpec::Euclidean { .. } => Ok(coords.to_vec()),
            MetricSpec::WeightedNorm { matrix } => Ok(apply_matrix(matrix, coords)),
            MetricSpec::ChartInduced { chart } => {
                let mut out = Vec::with_capacity(coords.len() / d * chart.ambient_dim());
                for x in coords.chunks_exact(d) {
                    out.extend(chart.embed(x)?);
                }
                Ok(out)
            }
        }
    }
}

fn apply_matrix(matrix: &DMatrix<f64>, coords: &[f64]) -> Vec<f64> {
    let d = matrix.ncols();
    let mut out = vec![0.0; coords.len()];
    for (src, dst) in coords.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
        for (row, slot) in dst.iter_mut().enumerate() {
            *slot = (0..d).map(|c| matrix[(row, c)] * src[c]).sum();
        }
    }
    out
}

/// ρ(y, z) under `metric`.
pub fn distance(metric: &MetricSpec, y: &[f64], z: &[f64]) -> Result<f64> {
    let d = metric.input_dim();
    if y.len() != d || z.len() != d {
        return Err(Error::InvalidArgument(format!(
            "points of dimension {} and {} for a metric on dimension {d}",
            y.len(),
            z.len()
        )));
    }
    match metric {
        MetricSpec::Euclidean { .. } => Ok(euclidean(y, z)),
        MetricSpec::WeightedNorm { matrix } => {
            let diff = DVector::from_iterator(d, y.iter().zip(z).map(|(a, b)| a - b));
            Ok((matrix * diff).norm())
        }
        MetricSpec::ChartInduced { chart } => Ok(euclidean(&chart.embed(y)?, &chart.embed(z)?)),
    }
}

/// Images `B·p` of the points, so that Euclidean distance between images
/// equals the weighted distance between originals.
pub fn whiten(metric: &MetricSpec, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    match metric {
        MetricSpec::ChartInduced { .. } => {
            Err(Error::Unsupported("chart-induced metrics are reduced by embedding, not whitening".into()))
        }
        _ => points
            .iter()
            .map(|p| {
                if p.len() != metric.input_dim() {
                    return Err(Error::InvalidArgument("point dimension mismatch".into()));
                }
                metric.working_coordinates(p)
            })
            .collect(),
    }
}

/// Minimum and maximum of `ρ(y, z) / ‖y − z‖` over up to `pair_budget` distinct pairs.
///
/// All pairs are used when there are at most `pair_budget`; otherwise pairs are
/// drawn from a fixed stream keyed by the cloud's seed.
pub fn metric_ratio_probe(metric: &MetricSpec, cloud: &PointCloud, pair_budget: usize) -> Result<(f64, f64)> {
    if cloud.dim() != metric.input_dim() {
        return Err(Error::InvalidArgument("cloud dimension does not match metric".into()));
    }
    let n = cloud.len();
    if n < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut visit = |i: usize, j: usize| -> Result<()> {
        let (y, z) = (cloud.point(i), cloud.point(j));
        let base = euclidean(y, z);
        if base > 0.0 {
            let ratio = distance(metric, y, z)? / base;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        Ok(())
    };
    let total_pairs = n * (n - 1) / 2;
    if total_pairs <= pair_budget {
        for i in 0..n {
            for j in i + 1..n {
                visit(i, j)?;
            }
        }
    } else {
        let mut rng = rng::stream(rng::derive_seed(cloud.seed(), &[0x70726f6265]), 0);
        for _ in 0..pair_budget {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            visit(i, j)?;
        }
    }
    if !lo.is_finite() {
        return Err(Error::DegenerateInput("all probed pairs coincide".into()));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ParamBox;
    use crate::sampling::ProcessTag;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn diag(a: f64, b: f64) -> MetricSpec {
        MetricSpec::weighted(DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]))).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e = MetricSpec::euclidean(2);
        assert_eq!(distance(&e, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let id = diag(1.0, 1.0);
        assert_eq!(distance(&id, &[0.2, -1.0], &[3.0, 4.5]).unwrap(), distance(&e, &[0.2, -1.0], &[3.0, 4.5]).unwrap());
        let circle = MetricSpec::chart(Chart::unit_circle());
        assert!((distance(&circle, &[0.0], &[PI]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_errors() {
        let e = MetricSpec::euclidean(2);
        assert!(matches!(distance(&e, &[0.0], &[1.0, 2.0]), Err(Error::InvalidArgument(_))));
        let circle = MetricSpec::chart(Chart::unit_circle());
        assert!(matches!(distance(&circle, &[0.0], &[10.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn weighted_requires_spd() {
        assert!(MetricSpec::weighted(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
        assert!(MetricSpec::weighted(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(MetricSpec::weighted(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).is_ok());
    }

    #[test]
    fn whiten_examples() {
        let pts = vec![vec![0.5, -2.0], vec![1.0, 1.0]];
        assert_eq!(whiten(&diag(1.0, 1.0), &pts).unwrap(), pts);
        let b = diag(2.0, 1.0);
        assert_eq!(whiten(&b, &[vec![1.0, 1.0]]).unwrap(), vec![vec![2.0, 1.0]]);
        let w = whiten(&b, &[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!((euclidean(&w[0], &w[1]) - 5f64.sqrt()).abs() < 1e-15);
        assert!((distance(&b, &[0.0, 0.0], &[1.0, 1.0]).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(whiten(&MetricSpec::chart(Chart::unit_circle()), &pts), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ratio_probe_examples() {
        let cloud = PointCloud::from_points(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 0.0]],
            0,
            ProcessTag::File,
        )
        .unwrap();
        assert_eq!(metric_ratio_probe(&MetricSpec::euclidean(2), &cloud, 100).unwrap(), (1.0, 1.0));
        let (c, big_c) = metric_ratio_probe(&diag(2.0, 1.0), &cloud, 100).unwrap();
        assert!(c >= 1.0 && big_c <= 2.0 && c <= big_c);

        let quarter = Chart::unit_circle().with_domain(ParamBox::new(vec![0.0], vec![PI / 2.0]).unwrap()).unwrap();
        let params: Vec<Vec<f64>> = (0..=40).map(|i| vec![PI / 2.0 * i as f64 / 40.0]).collect();
        let cloud = PointCloud::from_points(1, &params, 0, ProcessTag::File).unwrap();
        let (c, big_c) = metric_ratio_probe(&MetricSpec::chart(quarter), &cloud, 10_000).unwrap();
        let lower = 2.0 * (PI / 4.0).sin() / (PI / 2.0);
        assert!(c >= lower - 1e-12 && (c - lower).abs() < 1e-9, "{c}");
        assert!(big_c <= 1.0 && big_c > 0.999);
    }

    #[test]
    fn ratio_probe_rejects_duplicates() {
        let cloud = PointCloud::from_points(2, &[vec![1.0, 1.0], vec![1.0, 1.0]], 0, ProcessTag::File).unwrap();
        assert!(matches!(metric_ratio_probe(&MetricSpec::euclidean(2), &cloud, 10), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn chart_metric_satisfies_bilipschitz_probe() {
        let torus = Chart::torus(2.0, 1.0).unwrap().with_domain(ParamBox::cube(2, 0.0, 3.0).unwrap()).unwrap();
        let mut rng = rng::stream(3, 0);
        let params: Vec<Vec<f64>> =
            (0..400).map(|_| vec![rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)]).collect();
        let cloud = PointCloud::from_points(2, &params, 3, ProcessTag::File).unwrap();
        let (c, big_c) = metric_ratio_probe(&MetricSpec::chart(torus), &cloud, 10_000).unwrap();
        assert!(c > 0.0 && big_c.is_finite() && c <= big_c);
    }

    fn metrics() -> Vec<MetricSpec> {
        vec![
            MetricSpec::euclidean(2),
            MetricSpec::weighted(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap(),
            MetricSpec::chart(Chart::torus(2.0, 1.0).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn metric_axioms(a in proptest::array::uniform6(0.0f64..6.0)) {
            let (x, y, z) = ([a[0], a[1]], [a[2], a[3]], [a[4], a[5]]);
            for m in metrics() {
                let dxy = distance(&m, &x, &y).unwrap();
                let dyx = distance(&m, &y, &x).unwrap();
                prop_assert_eq!(dxy, dyx);
                prop_assert_eq!(distance(&m, &x, &x).unwrap(), 0.0);
                let dxz = distance(&m, &x, &z).unwrap();
                let dzy = distance(&m, &z, &y).unwrap();
                prop_assert!(dxy <= dxz + dzy + 1e-9);
            }
        }

        #[test]
        fn whitening_is_an_isometry(a in proptest::array::uniform4(-10.0f64..10.0)) {
            let m = &metrics()[1];
            let pts = vec![vec![a[0], a[1]], vec![a[2], a[3]]];
            let w = whiten(m, &pts).unwrap();
            let d = distance(m, &pts[0], &pts[1]).unwrap();
            prop_assert!((euclidean(&w[0], &w[1]) - d).abs() <= 1e-9 * (1.0 + d));
        }
    }
}
