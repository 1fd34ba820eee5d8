//! Smallest enclosing ball by Welzl's algorithm with the move-to-front heuristic.

use crate::error::{Error, Result};
use crate::tolerances::TOLERANCES;

/// Reusable scratch space for miniball computations on points of a fixed dimension.
#[derive(Debug, Clone)]
pub struct Miniball {
    dim: usize,
    center: Vec<f64>,
    radius_sq: f64,
    // Gram system scratch.
    gram: Vec<f64>,
    rhs: Vec<f64>,
    diffs: Vec<f64>,
}

impl Miniball {
    pub fn new(dim: usize) -> Self {
        Self { dim, center: vec![0.0; dim], radius_sq: -1.0, gram: Vec::new(), rhs: Vec::new(), diffs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Centre of the last computed ball.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Radius of the smallest ball enclosing `points` (given as slices into one buffer).
    ///
    /// The returned radius is the largest distance from the computed centre to
    /// any input point, so the ball always encloses the input.
    pub fn radius(&mut self, points: &[&[f64]]) -> f64 {
        debug_assert!(points.iter().all(|p| p.len() == self.dim));
        match points.len() {
            0 => 0.0,
            1 => {
                self.center.copy_from_slice(points[0]);
                0.0
            }
            _ => {
                let mut order: Vec<usize> = (0..points.len()).collect();
                let mut support: Vec<usize> = Vec::with_capacity(self.dim + 1);
                self.mtf(points, &mut order, points.len(), &mut support);
                points
                    .iter()
                    .map(|p| self.center.iter().zip(*p).map(|(c, x)| (c - x) * (c - x)).sum::<f64>())
                    .fold(0.0f64, f64::max)
                    .sqrt()
            }
        }
    }

    fn mtf(&mut self, points: &[&[f64]], order: &mut Vec<usize>, end: usize, support: &mut Vec<usize>) {
        self.ball_through(points, support);
        if support.len() == self.dim + 1 {
            return;
        }
        let mut i = 0;
        while i < end {
            let idx = order[i];
            if !self.contains(points[idx]) {
                support.push(idx);
                self.mtf(points, order, i, support);
                support.pop();
                // Move to front.
                order.remove(i);
                order.insert(0, idx);
            }
            i += 1;
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        if self.radius_sq < 0.0 {
            return false;
        }
        let d2: f64 = self.center.iter().zip(p).map(|(c, x)| (c - x) * (c - x)).sum();
        d2 <= self.radius_sq * (1.0 + TOLERANCES.miniball_slack) + f64::MIN_POSITIVE
    }

    /// Smallest ball with every support point on its boundary: the centre lies
    /// in their affine hull, `c = p0 + Σ λ_i (p_i − p0)` with
    /// `Σ_j λ_j ⟨v_i, v_j⟩ = ‖v_i‖² / 2`.
    fn ball_through(&mut self, points: &[&[f64]], support: &[usize]) {
        let Some(&first) = support.first() else {
            self.radius_sq = -1.0;
            return;
        };
        let p0 = points[first];
        let k = support.len() - 1;
        self.center.copy_from_slice(p0);
        if k == 0 {
            self.radius_sq = 0.0;
            return;
        }
        let d = self.dim;
        self.diffs.clear();
        for &s in &support[1..] {
            self.diffs.extend(points[s].iter().zip(p0).map(|(a, b)| a - b));
        }
        self.gram.clear();
        self.gram.resize(k * k, 0.0);
        self.rhs.clear();
        for i in 0..k {
            let vi = &self.diffs[i * d..(i + 1) * d];
            for j in 0..=i {
                let vj = &self.diffs[j * d..(j + 1) * d];
                let g: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                self.gram[i * k + j] = g;
                self.gram[j * k + i] = g;
            }
            self.rhs.push(0.5 * self.gram[i * k + i]);
        }
        let lambda = solve_dropping_dependent(&mut self.gram, &mut self.rhs, k);
        for (i, l) in lambda.iter().enumerate() {
            for (c, v) in self.center.iter_mut().zip(&self.diffs[i * d..(i + 1) * d]) {
                *c += l * v;
            }
        }
        self.radius_sq = support
            .iter()
            .map(|&s| self.center.iter().zip(points[s]).map(|(c, x)| (c - x) * (c - x)).sum::<f64>())
            .fold(0.0, f64::max);
    }
}

/// Gaussian elimination with partial pivoting; variables whose pivot vanishes
/// (affinely dependent support points) are fixed to zero.
fn solve_dropping_dependent(a: &mut [f64], b: &mut [f64], k: usize) -> Vec<f64> {
    let scale = (0..k).map(|i| a[i * k + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut active = vec![true; k];
    let mut pivot_row = vec![usize::MAX; k];
    let mut used_row = vec![false; k];
    for col in 0..k {
        let best =
            (0..k).filter(|&r| !used_row[r]).max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()));
        let Some(r) = best else {
            active[col] = false;
            continue;
        };
        if a[r * k + col].abs() <= 1e-13 * scale {
            active[col] = false;
            continue;
        }
        used_row[r] = true;
        pivot_row[col] = r;
        for other in 0..k {
            if other == r {
                continue;
            }
            let f = a[other * k + col] / a[r * k + col];
            if f != 0.0 {
                for c in col..k {
                    a[other * k + c] -= f * a[r * k + c];
                }
                b[other] -= f * b[r];
            }
        }
    }
    (0..k).map(|col| if active[col] { b[pivot_row[col]] / a[pivot_row[col] * k + col] } else { 0.0 }).collect()
}

/// Radius of the smallest Euclidean ball containing `points`.
pub fn miniball_radius(points: &[Vec<f64>]) -> Result<f64> {
    let first = points.first().ok_or_else(|| Error::InvalidArgument("miniball of an empty set".into()))?;
    let dim = first.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidArgument("points of mixed dimension".into()));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coordinate".into()));
    }
    let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
    Ok(Miniball::new(dim).radius(&refs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(miniball_radius(&[vec![1.0, 2.0]]).unwrap(), 0.0);
        assert!((miniball_radius(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap() - 2.5).abs() < 1e-15);
        let tri = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        assert!((miniball_radius(&tri).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(matches!(miniball_radius(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn obtuse_triangle_uses_longest_edge() {
        let tri = [vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]];
        assert!((miniball_radius(&tri).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let dup = [vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(miniball_radius(&dup).unwrap(), 0.0);
        let line = [vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]];
        assert!((miniball_radius(&line).unwrap() - 1.5).abs() < 1e-12);
        // Regular tetrahedron with edge √2: circumradius √3/2.
        let tet = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]];
        assert!((miniball_radius(&tet).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        // Square plus its centre: the centre is interior.
        let sq = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]];
        assert!((miniball_radius(&sq).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
