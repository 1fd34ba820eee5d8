//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cechsim_core::{PointCloud, SimplicialComplex};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Smallest enclosing ball radius by enumerating every candidate support set:
/// for each affinely independent subset, the circumcentre in its affine hull,
/// kept when the ball encloses all points.
pub fn brute_miniball(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    if n <= 1 {
        return 0.0;
    }
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let support: Vec<&Vec<f64>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &points[i]).collect();
        if support.len() > dim + 1 {
            continue;
        }
        let Some(center) = circumcenter(&support) else { continue };
        let r2 = dist2(&center, support[0]);
        if points.iter().all(|p| dist2(&center, p) <= r2 * (1.0 + 1e-10) + 1e-20) {
            best = best.min(r2.sqrt());
        }
    }
    best
}

fn circumcenter(support: &[&Vec<f64>]) -> Option<Vec<f64>> {
    let p0 = support[0];
    let k = support.len() - 1;
    if k == 0 {
        return Some(p0.clone());
    }
    let v: Vec<Vec<f64>> = support[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = DMatrix::from_fn(k, k, |i, j| 2.0 * dot(&v[i], &v[j]));
    let rhs = DVector::from_fn(k, |i, _| dot(&v[i], &v[i]));
    let scale = gram.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if gram.determinant().abs() <= 1e-12 * scale.powi(k as i32) {
        return None;
    }
    let lambda = gram.lu().solve(&rhs)?;
    let mut c = p0.clone();
    for (l, vi) in lambda.iter().zip(&v) {
        for (cj, x) in c.iter_mut().zip(vi) {
            *cj += l * x;
        }
    }
    Some(c)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Every subset of at most `max_dim + 1` points whose enclosing radius is at
/// most `r`, mapped to that radius.
pub fn brute_cech(cloud: &PointCloud, r: f64, max_dim: usize) -> BTreeMap<Vec<u32>, f64> {
    let n = cloud.len();
    let mut out = BTreeMap::new();
    let mut stack: Vec<u32> = Vec::new();
    fn rec(
        cloud: &PointCloud,
        r: f64,
        max_dim: usize,
        start: u32,
        stack: &mut Vec<u32>,
        out: &mut BTreeMap<Vec<u32>, f64>,
    ) {
        for v in start..cloud.len() as u32 {
            stack.push(v);
            let pts: Vec<Vec<f64>> = stack.iter().map(|&i| cloud.point(i as usize).to_vec()).collect();
            let rad = brute_miniball(&pts);
            // Enclosing radius is monotone, so supersets of a rejected set are skipped.
            if rad <= r {
                out.insert(stack.clone(), rad);
                if stack.len() <= max_dim {
                    rec(cloud, r, max_dim, v + 1, stack, out);
                }
            }
            stack.pop();
        }
    }
    if n > 0 {
        rec(cloud, r, max_dim, 0, &mut stack, &mut out);
    }
    out
}

/// All simplices of a complex with their values.
pub fn simplex_map(complex: &SimplicialComplex) -> BTreeMap<Vec<u32>, f64> {
    complex.layers().iter().flat_map(|l| l.iter().map(|(s, v)| (s.to_vec(), v))).collect()
}

/// Rank over ℤ/2 of a 0/1 matrix given as rows of bits.
fn rank_gf2(mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for c in 0..cols {
        let (w, b) = (c / 64, c % 64);
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] >> b & 1 == 1) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[w] >> b & 1 == 1 {
                row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers `β_0..=k_max` by dense Gaussian elimination of every boundary matrix.
pub fn dense_betti(complex: &SimplicialComplex, k_max: usize) -> Vec<usize> {
    let layers: Vec<Vec<Vec<u32>>> =
        complex.layers().iter().map(|l| l.iter().map(|(s, _)| s.to_vec()).collect()).collect();
    let count = |d: usize| layers.get(d).map_or(0, |l| l.len());
    let boundary_rank = |d: usize| -> usize {
        if d == 0 || count(d) == 0 {
            return 0;
        }
        let index: BTreeMap<&Vec<u32>, usize> = layers[d - 1].iter().enumerate().map(|(i, s)| (s, i)).collect();
        let words = count(d - 1).div_ceil(64);
        let rows = layers[d]
            .iter()
            .map(|s| {
                let mut row = vec![0u64; words];
                for skip in 0..s.len() {
                    let face: Vec<u32> = s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                    let i = index[&face];
                    row[i / 64] ^= 1 << (i % 64);
                }
                row
            })
            .collect();
        rank_gf2(rows)
    };
    (0..=k_max).map(|k| count(k) - boundary_rank(k) - boundary_rank(k + 1)).collect()
}

/// Closure of a few random simplices on at most `max_vertices` vertices.
pub fn random_complex<R: Rng>(rng: &mut R, max_vertices: usize, max_size: usize) -> SimplicialComplex {
    let n = rng.random_range(1..=max_vertices);
    let m = rng.random_range(0..=2 * n);
    let maximal: Vec<Vec<u32>> = (0..m)
        .map(|_| {
            let size = rng.random_range(1..=max_size.min(n));
            let mut s: Vec<u32> = rand::seq::index::sample(rng, n, size).into_iter().map(|v| v as u32).collect();
            s.sort_unstable();
            s
        })
        .collect();
    SimplicialComplex::from_maximal_simplices(n, &maximal).unwrap()
}

/// Uniform points in `[0, 1]^dim`.
pub fn random_cloud<R: Rng>(rng: &mut R, n: usize, dim: usize) -> PointCloud {
    let coords = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    PointCloud::new(dim, coords, 0, cechsim_core::sampling::ProcessTag::File).unwrap()
}
