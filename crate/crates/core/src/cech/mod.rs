//! Čech complexes and Čech filtrations.
//!
//! A set σ of points spans a simplex at radius r iff the closed radius-r balls
//! around them share a point, i.e. iff the smallest enclosing ball of σ has
//! radius ≤ r. Every metric is first reduced to Euclidean working coordinates
//! (see [`MetricSpec::working_coordinates`]); complexes over chart-induced
//! metrics are therefore built on the embedded points with witnesses anywhere
//! in the ambient space.

mod complex;
mod miniball;

pub use complex::{Layer, SimplexId, SimplicialComplex};
pub use miniball::{miniball_radius, Miniball};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{squared_euclidean, MetricSpec};
use crate::sampling::PointCloud;

/// Default bound on the number of simplices in one complex.
pub const DEFAULT_SIMPLEX_CAP: usize = 20_000_000;

/// Construction options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Construction aborts with [`Error::ResourceCap`] past this many simplices.
    pub simplex_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { simplex_cap: DEFAULT_SIMPLEX_CAP }
    }
}

/// The Čech complex `C(X, r, ρ)` up to dimension `max_dim`.
pub fn cech_complex(cloud: &PointCloud, r: f64, metric: &MetricSpec, max_dim: usize) -> Result<SimplicialComplex> {
    cech_complex_with(cloud, r, metric, max_dim, BuildOptions::default())
}

pub fn cech_complex_with(
    cloud: &PointCloud,
    r: f64,
    metric: &MetricSpec,
    max_dim: usize,
    options: BuildOptions,
) -> Result<SimplicialComplex> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive and finite")));
    }
    build(cloud, metric, max_dim, r, options)
}

/// Every simplex that appears at some radius ≤ `r_max`, valued by its
/// smallest-enclosing-ball radius in working coordinates.
pub fn cech_filtration(
    cloud: &PointCloud,
    metric: &MetricSpec,
    max_dim: usize,
    r_max: f64,
) -> Result<SimplicialComplex> {
    cech_filtration_with(cloud, metric, max_dim, r_max, BuildOptions::default())
}

pub fn cech_filtration_with(
    cloud: &PointCloud,
    metric: &MetricSpec,
    max_dim: usize,
    r_max: f64,
    options: BuildOptions,
) -> Result<SimplicialComplex> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius {r_max} must be positive and finite")));
    }
    build(cloud, metric, max_dim, r_max, options)
}

/// `(S_0, …, S_max_dim)`.
pub fn simplex_counts(complex: &SimplicialComplex) -> Vec<usize> {
    complex.simplex_counts()
}

fn build(
    cloud: &PointCloud,
    metric: &MetricSpec,
    max_dim: usize,
    r: f64,
    options: BuildOptions,
) -> Result<SimplicialComplex> {
    let n = cloud.len();
    if n > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many points".into()));
    }
    if n > 0 && cloud.dim() != metric.input_dim() {
        return Err(Error::InvalidArgument(format!(
            "cloud of dimension {} for a metric on dimension {}",
            cloud.dim(),
            metric.input_dim()
        )));
    }
    let dim = metric.working_dim();
    let coords = metric.working_coordinates(cloud.coords())?;
    let point = |i: u32| &coords[i as usize * dim..(i as usize + 1) * dim];
    let check_cap = |total: usize| {
        if total > options.simplex_cap {
            Err(Error::ResourceCap { cap: options.simplex_cap })
        } else {
            Ok(())
        }
    };

    let mut vertices = Layer::new(0);
    for v in 0..n as u32 {
        vertices.push(&[v], 0.0);
    }
    check_cap(n)?;
    let mut layers = vec![vertices];
    let mut total = n;
    if max_dim == 0 || n < 2 {
        let truncated = max_dim == 0 && n >= 2 && has_close_pair(&coords, dim, r);
        return Ok(SimplicialComplex::from_layers(layers, max_dim, truncated, Some(r)));
    }

    let mut ball = Miniball::new(dim);
    let mut scratch: Vec<&[f64]> = Vec::with_capacity(max_dim + 1);

    // Edges from the neighbour grid.
    let upper = upper_neighbours(&coords, dim, r);
    let mut edges = Layer::new(1);
    for (i, nbrs) in upper.iter().enumerate() {
        for &j in nbrs {
            scratch.clear();
            scratch.push(point(i as u32));
            scratch.push(point(j));
            let value = ball.radius(&scratch);
            if value <= r {
                edges.push(&[i as u32, j], value);
            }
        }
    }
    total += edges.len();
    check_cap(total)?;
    layers.push(edges);

    // Higher simplices: extend each (d−1)-simplex by a larger vertex whose
    // other facets are all present.
    let mut tau: Vec<u32> = Vec::with_capacity(max_dim + 1);
    let mut facet: Vec<u32> = Vec::with_capacity(max_dim);
    for d in 2..=max_dim {
        let prev = &layers[d - 1];
        let edge_layer = &layers[1];
        let mut next = Layer::new(d);
        for si in 0..prev.len() {
            let sigma = prev.simplex(si);
            let sigma_value = prev.value(si);
            let last = *sigma.last().expect("nonempty simplex");
            'candidates: for &u in &upper[last as usize] {
                // Cheap adjacency check against the first vertex before facet lookups.
                if edge_layer.find(&[sigma[0], u]).is_none() {
                    continue;
                }
                tau.clear();
                tau.extend_from_slice(sigma);
                tau.push(u);
                let mut value = sigma_value;
                for skip in 0..d {
                    facet.clear();
                    facet.extend(tau.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, v)| *v));
                    match prev.find(&facet) {
                        Some(fi) => value = value.max(prev.value(fi)),
                        None => continue 'candidates,
                    }
                }
                if value > r {
                    continue;
                }
                scratch.clear();
                scratch.extend(tau.iter().map(|&v| point(v)));
                value = value.max(ball.radius(&scratch));
                if value <= r {
                    next.push(&tau, value);
                }
            }
        }
        total += next.len();
        check_cap(total)?;
        let empty = next.is_empty();
        layers.push(next);
        if empty {
            break;
        }
    }
    let built = layers.len() - 1;
    let truncated = built == max_dim && !layers[max_dim].is_empty();
    while layers.len() <= max_dim {
        layers.push(Layer::new(layers.len()));
    }
    Ok(SimplicialComplex::from_layers(layers, max_dim, truncated, Some(r)))
}

fn has_close_pair(coords: &[f64], dim: usize, r: f64) -> bool {
    upper_neighbours(coords, dim, r).iter().any(|v| !v.is_empty())
}

/// For each point, the larger-indexed points within distance `2r`, ascending.
///
/// Points are hashed into a grid of cell side `2r`, so every such pair lies in
/// the same or an adjacent cell.
pub(crate) fn upper_neighbours(coords: &[f64], dim: usize, r: f64) -> Vec<Vec<u32>> {
    let n = coords.len().checked_div(dim).unwrap_or(0);
    let cell = 2.0 * r;
    // Slack keeps pairs at exactly 2r whose squared distance rounds up.
    let reach_sq = cell * cell * (1.0 + 1e-12);
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
    for i in 0..n {
        grid.entry(key(&coords[i * dim..(i + 1) * dim])).or_default().push(i as u32);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new(); n];
    let mut probe = vec![0i64; dim];
    for (i, nbrs) in out.iter_mut().enumerate() {
        let p = &coords[i * dim..(i + 1) * dim];
        let base = key(p);
        for off in &offsets {
            for a in 0..dim {
                probe[a] = base[a] + off[a];
            }
            if let Some(bucket) = grid.get(&probe) {
                for &j in bucket {
                    if j as usize > i
                        && squared_euclidean(p, &coords[j as usize * dim..(j as usize + 1) * dim]) <= reach_sq
                    {
                        nbrs.push(j);
                    }
                }
            }
        }
        nbrs.sort_unstable();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ProcessTag;
    use std::f64::consts::PI;

    fn cloud(points: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_points(points[0].len(), points, 0, ProcessTag::File).unwrap()
    }

    pub(crate) fn triangle() -> PointCloud {
        cloud(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]])
    }

    pub(crate) fn hexagon() -> PointCloud {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|k| {
                let a = PI / 3.0 * k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        cloud(&pts)
    }

    #[test]
    fn triangle_examples() {
        let e = MetricSpec::euclidean(2);
        assert_eq!(cech_complex(&triangle(), 0.5, &e, 2).unwrap().simplex_counts(), vec![3, 3, 0]);
        assert_eq!(cech_complex(&triangle(), 0.58, &e, 2).unwrap().simplex_counts(), vec![3, 3, 1]);
    }

    #[test]
    fn hexagon_is_a_six_cycle() {
        let k = cech_complex(&hexagon(), 0.55, &MetricSpec::euclidean(2), 2).unwrap();
        assert_eq!(simplex_counts(&k), vec![6, 6, 0]);
        assert!(!k.is_truncated());
    }

    #[test]
    fn tight_cluster_is_full_simplex() {
        let c = cloud(&[vec![0.0, 0.0], vec![0.01, 0.0], vec![0.0, 0.01], vec![0.01, 0.01]]);
        let k = cech_complex(&c, 1.0, &MetricSpec::euclidean(2), 3).unwrap();
        assert_eq!(k.simplex_counts(), vec![4, 6, 4, 1]);
        assert!(k.is_truncated());
        let k = cech_complex(&c, 1.0, &MetricSpec::euclidean(2), 2).unwrap();
        assert_eq!(k.simplex_counts(), vec![4, 6, 4]);
    }

    #[test]
    fn empty_cloud() {
        let c = PointCloud::empty(2, 0, ProcessTag::File);
        assert_eq!(cech_complex(&c, 1.0, &MetricSpec::euclidean(2), 2).unwrap().simplex_counts(), vec![0, 0, 0]);
    }

    #[test]
    fn argument_errors() {
        let e = MetricSpec::euclidean(2);
        assert!(matches!(cech_complex(&triangle(), 0.0, &e, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(cech_complex(&triangle(), -1.0, &e, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(cech_complex(&triangle(), 1.0, &MetricSpec::euclidean(3), 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn filtration_values() {
        let f = cech_filtration(&triangle(), &MetricSpec::euclidean(2), 2, 1.0).unwrap();
        let edges = f.layer(1).unwrap();
        assert!(edges.iter().all(|(_, v)| (v - 0.5).abs() < 1e-12));
        assert!((f.layer(2).unwrap().value(0) - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let tiny = cech_filtration(&triangle(), &MetricSpec::euclidean(2), 2, 0.4).unwrap();
        assert_eq!(tiny.simplex_counts(), vec![3, 0, 0]);
        assert!(tiny.layer(0).unwrap().iter().all(|(_, v)| v == 0.0));
    }

    #[test]
    fn duplicates_give_zero_radius_edges() {
        let c = cloud(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let f = cech_filtration(&c, &MetricSpec::euclidean(2), 1, 0.1).unwrap();
        assert_eq!(f.simplex_counts(), vec![2, 1]);
        assert_eq!(f.layer(1).unwrap().value(0), 0.0);
    }

    #[test]
    fn resource_cap_aborts() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 * 1e-3, 0.0]).collect();
        let opts = BuildOptions { simplex_cap: 200 };
        assert!(matches!(
            cech_complex_with(&cloud(&pts), 1.0, &MetricSpec::euclidean(2), 3, opts),
            Err(Error::ResourceCap { cap: 200 })
        ));
    }

    #[test]
    fn chart_metric_builds_on_embedded_points() {
        use crate::geometry::Chart;
        // Six parameters equally spaced on the circle reproduce the hexagon.
        let params: Vec<Vec<f64>> = (0..6).map(|k| vec![PI / 3.0 * k as f64]).collect();
        let c = PointCloud::from_points(1, &params, 0, ProcessTag::File).unwrap();
        let k = cech_complex(&c, 0.55, &MetricSpec::chart(Chart::unit_circle()), 2).unwrap();
        assert_eq!(k.simplex_counts(), vec![6, 6, 0]);
    }
}
