use std::cmp::Ordering;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// All simplices of one dimension, stored flat and sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    dim: usize,
    verts: Vec<u32>,
    values: Vec<f64>,
}

impl Layer {
    pub(crate) fn new(dim: usize) -> Self {
        Self { dim, verts: Vec::new(), values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn simplex(&self, i: usize) -> &[u32] {
        let w = self.dim + 1;
        &self.verts[i * w..(i + 1) * w]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.verts.chunks_exact(self.dim + 1).zip(self.values.iter().copied())
    }

    /// Index of `simplex` by binary search.
    pub fn find(&self, simplex: &[u32]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.simplex(mid).cmp(simplex) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub(crate) fn push(&mut self, simplex: &[u32], value: f64) {
        debug_assert_eq!(simplex.len(), self.dim + 1);
        self.verts.extend_from_slice(simplex);
        self.values.push(value);
    }
}

/// A finite simplicial complex on vertices `0..num_vertices` with a
/// filtration value per simplex.
///
/// Vertex tuples are strictly increasing, each layer is sorted
/// lexicographically, the complex is closed under faces and values never
/// decrease from a face to a coface.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    layers: Vec<Layer>,
    max_dim: usize,
    truncated: bool,
    radius: Option<f64>,
}

/// Position of a simplex: `(dimension, index within its layer)`.
pub type SimplexId = (usize, usize);

impl SimplicialComplex {
    pub(crate) fn from_layers(layers: Vec<Layer>, max_dim: usize, truncated: bool, radius: Option<f64>) -> Self {
        Self { layers, max_dim, truncated, radius }
    }

    /// Complex with `num_vertices` isolated vertices.
    pub fn vertices_only(num_vertices: usize) -> Self {
        let mut layer = Layer::new(0);
        for v in 0..num_vertices as u32 {
            layer.push(&[v], 0.0);
        }
        Self { layers: vec![layer], max_dim: 0, truncated: false, radius: None }
    }

    /// Closure of the given simplices (all faces added), every value 0.
    pub fn from_maximal_simplices(num_vertices: usize, maximal: &[Vec<u32>]) -> Result<Self> {
        let with_values: Vec<(Vec<u32>, f64)> = maximal.iter().map(|s| (s.clone(), 0.0)).collect();
        Self::from_valued_closure(num_vertices, &with_values)
    }

    /// Closure of the given simplices, where each added face takes the smallest
    /// value among the listed simplices containing it.
    pub fn from_valued_closure(num_vertices: usize, simplices: &[(Vec<u32>, f64)]) -> Result<Self> {
        use std::collections::BTreeMap;
        let mut by_dim: Vec<BTreeMap<Vec<u32>, f64>> = vec![BTreeMap::new()];
        for v in 0..num_vertices as u32 {
            by_dim[0].insert(vec![v], 0.0);
        }
        for (s, value) in simplices {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&v| v as usize >= num_vertices) {
                return Err(Error::InvalidArgument(format!("bad simplex {s:?} on {num_vertices} vertices")));
            }
            if !(value.is_finite() && *value >= 0.0) {
                return Err(Error::InvalidArgument(format!("bad filtration value {value}")));
            }
            // Every nonempty subset.
            let k = s.len();
            for mask in 1u64..(1u64 << k) {
                let face: Vec<u32> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
                let d = face.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize_with(d + 1, BTreeMap::new);
                }
                let slot = by_dim[d].entry(face).or_insert(*value);
                if d > 0 {
                    *slot = slot.min(*value);
                }
            }
        }
        let layers: Vec<Layer> = by_dim
            .into_iter()
            .enumerate()
            .map(|(d, map)| {
                let mut layer = Layer::new(d);
                for (s, v) in map {
                    layer.push(&s, v);
                }
                layer
            })
            .collect();
        let max_dim = layers.len() - 1;
        let complex = Self { layers, max_dim, truncated: false, radius: None };
        complex.validate()?;
        Ok(complex)
    }

    /// Dimension cap the complex was built with.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// True when simplices above `max_dim` may exist but were not built.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Radius the complex was built or thresholded at (the cut-off `r_max` for filtrations).
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn num_vertices(&self) -> usize {
        self.layers.first().map_or(0, Layer::len)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// The layer of dimension `d` (empty when above the stored dimensions).
    pub fn layer(&self, d: usize) -> Option<&Layer> {
        self.layers.get(d)
    }

    /// Highest dimension holding at least one simplex.
    pub fn top_dim(&self) -> Option<usize> {
        self.layers.iter().rposition(|l| !l.is_empty())
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, simplex: &[u32]) -> bool {
        simplex.len().checked_sub(1).and_then(|d| self.layers.get(d)).is_some_and(|l| l.find(simplex).is_some())
    }

    /// `S_j` for `j = 0..=max_dim`.
    pub fn simplex_counts(&self) -> Vec<usize> {
        (0..=self.max_dim).map(|d| self.layers.get(d).map_or(0, Layer::len)).collect()
    }

    /// `Σ_j (−1)^j S_j` over the stored simplices.
    pub fn euler_characteristic(&self) -> i64 {
        self.layers.iter().enumerate().map(|(d, l)| if d % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) }).sum()
    }

    /// Simplices with value ≤ `r`.
    pub fn threshold(&self, r: f64) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut out = Layer::new(l.dim);
                for (s, v) in l.iter() {
                    if v <= r {
                        out.push(s, v);
                    }
                }
                out
            })
            .collect::<Vec<_>>();
        let truncated = self.truncated && layers.get(self.max_dim).is_some_and(|l| !l.is_empty());
        Self { layers, max_dim: self.max_dim, truncated, radius: Some(r) }
    }

    /// The complex restricted to dimensions `≤ dim`.
    pub fn skeleton(&self, dim: usize) -> Self {
        let layers: Vec<Layer> = self.layers.iter().take(dim + 1).cloned().collect();
        let truncated =
            self.layers.get(dim + 1).is_some_and(|l| !l.is_empty()) || (self.truncated && dim >= self.max_dim);
        Self { layers, max_dim: dim.min(self.max_dim), truncated, radius: self.radius }
    }

    /// Whether every simplex of `self` is a simplex of `other`.
    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        self.layers.iter().all(|l| {
            l.is_empty() || other.layers.get(l.dim).is_some_and(|o| l.iter().all(|(s, _)| o.find(s).is_some()))
        })
    }

    /// Simplices in filtration order: by value, then dimension, then vertices.
    pub fn filtration_order(&self) -> Vec<SimplexId> {
        let mut ids: Vec<SimplexId> =
            self.layers.iter().enumerate().flat_map(|(d, l)| (0..l.len()).map(move |i| (d, i))).collect();
        ids.sort_by(|a, b| self.compare(*a, *b));
        ids
    }

    fn compare(&self, a: SimplexId, b: SimplexId) -> Ordering {
        let (la, lb) = (&self.layers[a.0], &self.layers[b.0]);
        la.value(a.1).total_cmp(&lb.value(b.1)).then(a.0.cmp(&b.0)).then_with(|| la.simplex(a.1).cmp(lb.simplex(b.1)))
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        for (d, layer) in self.layers.iter().enumerate() {
            if layer.dim != d {
                return Err(Error::InvalidArgument(format!("layer {d} labelled {}", layer.dim)));
            }
            for i in 0..layer.len() {
                let s = layer.simplex(i);
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidArgument(format!("vertex tuple {s:?} not strictly increasing")));
                }
                if i > 0 && layer.simplex(i - 1) >= s {
                    return Err(Error::InvalidArgument(format!("layer {d} unsorted or duplicated at {s:?}")));
                }
                if d == 0 {
                    continue;
                }
                let mut face = Vec::with_capacity(d);
                for skip in 0..=d {
                    face.clear();
                    face.extend(s.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, v)| *v));
                    let Some(fi) = self.layers[d - 1].find(&face) else {
                        return Err(Error::InvalidArgument(format!("face {face:?} of {s:?} missing")));
                    };
                    if self.layers[d - 1].value(fi) > layer.value(i) {
                        return Err(Error::InvalidArgument(format!("filtration decreases from {face:?} to {s:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// One line per simplex, `dim v0 … vk value`, in filtration order.
    pub fn write_lines<W: Write>(&self, mut w: W) -> Result<()> {
        for (d, i) in self.filtration_order() {
            let layer = &self.layers[d];
            let verts: Vec<String> = layer.simplex(i).iter().map(u32::to_string).collect();
            writeln!(w, "{d} {} {:?}", verts.join(" "), layer.value(i))?;
        }
        Ok(())
    }

    /// Parses the line format; the result must be face-closed.
    pub fn read_lines<R: BufRead>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        let mut num_vertices = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| Error::Parse(format!("line {}: {m}", lineno + 1));
            let d: usize = fields.first().ok_or_else(|| bad("empty"))?.parse().map_err(|_| bad("dimension"))?;
            if fields.len() != d + 3 {
                return Err(bad("wrong field count"));
            }
            let verts = fields[1..=d + 1]
                .iter()
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("vertex"))?;
            let value: f64 = fields[d + 2].parse().map_err(|_| bad("value"))?;
            num_vertices = num_vertices.max(verts.iter().max().map_or(0, |&v| v as usize + 1));
            entries.push((verts, value));
        }
        let max_dim = entries.iter().map(|(s, _)| s.len() - 1).max().unwrap_or(0);
        let mut layers: Vec<Layer> = (0..=max_dim).map(Layer::new).collect();
        entries.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        for (s, v) in &entries {
            layers[s.len() - 1].push(s, *v);
        }
        if layers[0].len() != num_vertices && !entries.is_empty() {
            return Err(Error::Parse("vertex ids must be 0..n with every vertex listed".into()));
        }
        let complex = Self { layers, max_dim, truncated: false, radius: None };
        complex.validate()?;
        Ok(complex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_counts() {
        let k = SimplicialComplex::from_maximal_simplices(4, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(k.simplex_counts(), vec![4, 6, 4, 1]);
        assert_eq!(k.euler_characteristic(), 1);
        assert!(SimplicialComplex::vertices_only(0).is_empty());
        assert_eq!(SimplicialComplex::vertices_only(0).euler_characteristic(), 0);
    }

    #[test]
    fn validate_catches_missing_faces_and_bad_order() {
        let mut k = SimplicialComplex::from_maximal_simplices(3, &[vec![0, 1, 2]]).unwrap();
        k.layers[1] = {
            let mut l = Layer::new(1);
            l.push(&[0, 1], 0.0);
            l.push(&[1, 2], 0.0);
            l
        };
        assert!(k.validate().is_err());
        let k = SimplicialComplex::from_valued_closure(3, &[(vec![0, 1], 2.0), (vec![0, 1, 2], 1.0)]).unwrap();
        // The edge takes the smaller value of the listed cofaces.
        assert_eq!(k.layer(1).unwrap().value(k.layer(1).unwrap().find(&[0, 1]).unwrap()), 1.0);
    }

    #[test]
    fn line_format_round_trip() {
        let k = SimplicialComplex::from_valued_closure(4, &[(vec![0, 1, 2], 0.7), (vec![2, 3], 0.3)]).unwrap();
        let mut buf = Vec::new();
        k.write_lines(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("0 0 0.0\n"));
        let back = SimplicialComplex::read_lines(buf.as_slice()).unwrap();
        assert_eq!(back.layers, k.layers);
        assert!(SimplicialComplex::read_lines("1 0 1 0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn subcomplex_and_threshold() {
        let k = SimplicialComplex::from_valued_closure(
            3,
            &[(vec![0, 1], 0.2), (vec![1, 2], 0.5), (vec![0, 2], 0.6), (vec![0, 1, 2], 0.9)],
        )
        .unwrap();
        let t = k.threshold(0.55);
        assert_eq!(t.simplex_counts(), vec![3, 2, 0]);
        assert!(t.is_subcomplex_of(&k));
        assert!(!k.is_subcomplex_of(&t));
        let order = k.filtration_order();
        assert_eq!(order.first(), Some(&(0, 0)));
        assert_eq!(order.last(), Some(&(2, 0)));
    }
}
