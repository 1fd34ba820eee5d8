use std::io::Write;

use crate::cech::SimplicialComplex;
use crate::error::Result;

/// A finite persistence interval; `death` is `+∞` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

/// Persistence pairing of a filtration, restricted to dimensions `≤ top`.
#[derive(Debug, Clone)]
pub struct Persistence {
    pairs: Vec<PersistencePair>,
}

/// Merges `src` into `dst` over ℤ/2 (symmetric difference of sorted lists).
fn add_column(dst: &mut Vec<usize>, src: &[usize], buf: &mut Vec<usize>) {
    buf.clear();
    let (mut i, mut j) = (0, 0);
    while i < dst.len() && j < src.len() {
        match dst[i].cmp(&src[j]) {
            std::cmp::Ordering::Less => {
                buf.push(dst[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                buf.push(src[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    buf.extend_from_slice(&dst[i..]);
    buf.extend_from_slice(&src[j..]);
    std::mem::swap(dst, buf);
}

impl Persistence {
    /// Reduces the boundary matrix of all simplices of dimension `≤ top`
    /// ordered by (value, dimension, vertices).
    pub fn compute(complex: &SimplicialComplex, top: usize) -> Self {
        let order: Vec<_> = complex.filtration_order().into_iter().filter(|(d, _)| *d <= top).collect();
        let layers = complex.layers();
        // Position of each simplex in the order, per layer.
        let mut position: Vec<Vec<usize>> = layers.iter().take(top + 1).map(|l| vec![0; l.len()]).collect();
        for (pos, &(d, i)) in order.iter().enumerate() {
            position[d][i] = pos;
        }
        let value = |pos: usize| {
            let (d, i) = order[pos];
            layers[d].value(i)
        };

        let m = order.len();
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut pivot_owner: Vec<usize> = vec![usize::MAX; m];
        let mut paired = vec![false; m];
        let mut pairs = Vec::new();
        let mut face = Vec::new();
        let mut buf = Vec::new();
        for col in 0..m {
            let (d, i) = order[col];
            if d == 0 {
                continue;
            }
            let simplex = layers[d].simplex(i);
            let mut boundary: Vec<usize> = (0..=d)
                .map(|skip| {
                    face.clear();
                    face.extend(simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, v)| *v));
                    let fi = layers[d - 1].find(&face).expect("complex is face-closed");
                    position[d - 1][fi]
                })
                .collect();
            boundary.sort_unstable();
            while let Some(&low) = boundary.last() {
                let owner = pivot_owner[low];
                if owner == usize::MAX {
                    break;
                }
                add_column(&mut boundary, &columns[owner], &mut buf);
            }
            if let Some(&low) = boundary.last() {
                pivot_owner[low] = col;
                paired[low] = true;
                paired[col] = true;
                pairs.push(PersistencePair { dim: d - 1, birth: value(low), death: value(col) });
                columns[col] = boundary;
            }
        }
        for pos in 0..m {
            let (d, _) = order[pos];
            // Top-dimensional simplices have no cofaces in the reduced range.
            if !paired[pos] && d < top {
                pairs.push(PersistencePair { dim: d, birth: value(pos), death: f64::INFINITY });
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    /// Essential classes of dimension `k`, i.e. `β_k` of the whole complex.
    pub fn unpaired_count(&self, k: usize) -> usize {
        self.pairs.iter().filter(|p| p.dim == k && p.death.is_infinite()).count()
    }

    /// `#{(b, d) : b ≤ s, d > t}` in dimension `k`, essential classes included.
    pub fn persistent_betti(&self, k: usize, s: f64, t: f64) -> usize {
        self.pairs.iter().filter(|p| p.dim == k && p.birth <= s && p.death > t).count()
    }

    /// CSV `k,birth,death` with `inf` for essential classes; zero-length pairs are kept.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,birth,death")?;
        for p in &self.pairs {
            if p.death.is_infinite() {
                writeln!(w, "{},{:?},inf", p.dim, p.birth)?;
            } else {
                writeln!(w, "{},{:?},{:?}", p.dim, p.birth, p.death)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut a = vec![1, 3, 5, 7];
        let mut buf = Vec::new();
        add_column(&mut a, &[3, 4, 7, 9], &mut buf);
        assert_eq!(a, vec![1, 4, 5, 9]);
    }

    #[test]
    fn triangle_filtration_pairs() {
        let k = SimplicialComplex::from_valued_closure(
            3,
            &[(vec![0, 1], 1.0), (vec![1, 2], 2.0), (vec![0, 2], 3.0), (vec![0, 1, 2], 4.0)],
        )
        .unwrap();
        let p = Persistence::compute(&k, 2);
        let mut dims: Vec<(usize, f64, f64)> = p.pairs().iter().map(|q| (q.dim, q.birth, q.death)).collect();
        dims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(dims, vec![(0, 0.0, 1.0), (0, 0.0, 2.0), (0, 0.0, f64::INFINITY), (1, 3.0, 4.0)]);
        let mut csv = Vec::new();
        p.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("0,0.0,inf"));
    }
}
