//! Homology over ℤ/2: Betti numbers, persistence pairs and persistent Betti
//! numbers by column reduction of the boundary matrix in filtration order.

mod reduction;
mod union_find;

pub use reduction::{Persistence, PersistencePair};
pub use union_find::UnionFind;

use serde::{Deserialize, Serialize};

use crate::cech::SimplicialComplex;
use crate::error::{Error, Result};

/// `β_0, …, β_kmax` over ℤ/2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    pub fn get(&self, k: usize) -> usize {
        self.0.get(k).copied().unwrap_or(0)
    }

    /// `Σ_k (−1)^k β_k`.
    pub fn alternating_sum(&self) -> i64 {
        self.0.iter().enumerate().map(|(k, b)| if k % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum()
    }
}

/// Fails when β_k for some `k ≤ k_max` could depend on simplices the
/// construction did not build.
fn check_sufficient(complex: &SimplicialComplex, k_max: usize) -> Result<()> {
    if complex.is_truncated() && k_max >= complex.max_dim() {
        return Err(Error::InsufficientComplex { built: complex.max_dim(), requested: k_max });
    }
    Ok(())
}

/// Betti numbers `β_0 … β_kmax` of the complex.
pub fn betti_numbers(complex: &SimplicialComplex, k_max: usize) -> Result<BettiVector> {
    check_sufficient(complex, k_max)?;
    let persistence = Persistence::compute(complex, k_max + 1);
    Ok(BettiVector((0..=k_max).map(|k| persistence.unpaired_count(k)).collect()))
}

/// Number of connected components, by union-find over the edges.
pub fn connected_components(complex: &SimplicialComplex) -> usize {
    let n = complex.num_vertices();
    let mut uf = UnionFind::new(n);
    if let Some(edges) = complex.layer(1) {
        for (e, _) in edges.iter() {
            uf.union(e[0] as usize, e[1] as usize);
        }
    }
    uf.count()
}

/// `Σ_j (−1)^j S_j` over the stored simplices.
pub fn euler_characteristic(complex: &SimplicialComplex) -> i64 {
    complex.euler_characteristic()
}

/// Rank of `H_k(K_s) → H_k(K_t)` in the filtration.
pub fn persistent_betti(filtration: &SimplicialComplex, k: usize, s: f64, t: f64) -> Result<usize> {
    if s > t {
        return Err(Error::InvalidArgument(format!("s = {s} exceeds t = {t}")));
    }
    if let Some(r_max) = filtration.radius() {
        if t > r_max {
            return Err(Error::InvalidArgument(format!("t = {t} beyond the filtration cut-off {r_max}")));
        }
    }
    check_sufficient(filtration, k)?;
    Ok(Persistence::compute(filtration, k + 1).persistent_betti(k, s, t))
}

/// Checks `|β_k(K′) − β_k(K)| ≤ Σ_{j=k}^{k+1} (S_j(K′) − S_j(K))` for `K ⊆ K′`.
/// Returns `(lhs, rhs, holds)`.
pub fn betti_diff_bound_check(
    sub: &SimplicialComplex,
    sup: &SimplicialComplex,
    k: usize,
) -> Result<(usize, usize, bool)> {
    if !sub.is_subcomplex_of(sup) {
        return Err(Error::InvalidArgument("first complex is not contained in the second".into()));
    }
    let b_sub = betti_numbers(sub, k)?.get(k);
    let b_sup = betti_numbers(sup, k)?.get(k);
    let count = |c: &SimplicialComplex, j: usize| c.layer(j).map_or(0, |l| l.len());
    let lhs = b_sup.abs_diff(b_sub);
    let rhs = (k..=k + 1).map(|j| count(sup, j) - count(sub, j)).sum::<usize>();
    Ok((lhs, rhs, lhs <= rhs))
}
