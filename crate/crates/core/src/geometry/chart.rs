use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::TOLERANCES;

/// Closed axis-aligned box `[lo_0, hi_0] × … × [lo_{m-1}, hi_{m-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidArgument("box bounds must have equal nonzero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument(format!("empty or unbounded box {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// True when the interiors of the two boxes intersect.
    pub fn overlaps(&self, other: &ParamBox) -> bool {
        self.dim() == other.dim() && (0..self.dim()).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    pub fn is_subset_of(&self, other: &ParamBox) -> bool {
        self.dim() == other.dim() && (0..self.dim()).all(|i| other.lo[i] <= self.lo[i] && self.hi[i] <= other.hi[i])
    }

    /// Calls `f(midpoint, cell_volume)` on a regular grid with `cells` cells per axis.
    pub fn for_each_midpoint(&self, cells: usize, mut f: impl FnMut(&[f64], f64)) {
        let m = self.dim();
        let h: Vec<f64> = (0..m).map(|i| (self.hi[i] - self.lo[i]) / cells as f64).collect();
        let cell_volume: f64 = h.iter().product();
        let mut idx = vec![0usize; m];
        let mut x = vec![0.0; m];
        loop {
            for i in 0..m {
                x[i] = self.lo[i] + (idx[i] as f64 + 0.5) * h[i];
            }
            f(&x, cell_volume);
            let mut axis = 0;
            loop {
                if axis == m {
                    return;
                }
                idx[axis] += 1;
                if idx[axis] < cells {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// Parametrization map of a chart.
#[derive(Clone)]
pub enum ChartKind {
    /// `t ↦ (R cos t, R sin t)`.
    Circle { radius: f64 },
    /// `(u, v) ↦ ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
    Torus { major: f64, minor: f64 },
    /// Spherical coordinates `(θ, ϕ) ↦ (sin θ cos ϕ, sin θ sin ϕ, cos θ)` on the unit sphere.
    Sphere,
    /// Graph chart `(x, y) ↦ (x, y, ±√(1 − x² − y²))` over the open unit disc.
    Hemisphere { upper: bool },
    /// `x ↦ A x` for an `N × m` matrix.
    Linear { matrix: DMatrix<f64> },
    /// Arbitrary C¹ map; the Jacobian is taken by central differences.
    Custom { name: String, ambient_dim: usize, map: super::ChartMap },
}

impl fmt::Debug for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Circle { radius } => write!(f, "Circle {{ radius: {radius} }}"),
            ChartKind::Torus { major, minor } => write!(f, "Torus {{ major: {major}, minor: {minor} }}"),
            ChartKind::Sphere => write!(f, "Sphere"),
            ChartKind::Hemisphere { upper } => write!(f, "Hemisphere {{ upper: {upper} }}"),
            ChartKind::Linear { matrix } => write!(f, "Linear {{ {}x{} }}", matrix.nrows(), matrix.ncols()),
            ChartKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A chart `(V, φ)` of an embedded manifold.
#[derive(Debug, Clone)]
pub struct Chart {
    kind: ChartKind,
    domain: ParamBox,
}

impl Chart {
    pub fn new(kind: ChartKind, domain: ParamBox) -> Result<Self> {
        let m = match &kind {
            ChartKind::Circle { radius } => {
                positive(*radius, "circle radius")?;
                1
            }
            ChartKind::Torus { major, minor } => {
                positive(*minor, "torus minor radius")?;
                if major <= minor {
                    return Err(Error::InvalidArgument("torus needs major > minor radius".into()));
                }
                2
            }
            ChartKind::Sphere | ChartKind::Hemisphere { .. } => 2,
            ChartKind::Linear { matrix } => {
                if matrix.ncols() == 0 || matrix.nrows() < matrix.ncols() {
                    return Err(Error::InvalidArgument("linear chart needs an N×m matrix with N ≥ m ≥ 1".into()));
                }
                matrix.ncols()
            }
            ChartKind::Custom { ambient_dim, .. } => {
                if *ambient_dim == 0 {
                    return Err(Error::InvalidArgument("custom chart ambient dimension is zero".into()));
                }
                domain.dim()
            }
        };
        if domain.dim() != m {
            return Err(Error::InvalidArgument(format!(
                "chart domain has dimension {}, parametrization needs {m}",
                domain.dim()
            )));
        }
        Ok(Self { kind, domain })
    }

    /// Unit circle over `[0, 2π]`.
    pub fn unit_circle() -> Self {
        Self::circle(1.0).expect("unit circle is valid")
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(ChartKind::Circle { radius }, ParamBox::new(vec![0.0], vec![2.0 * PI])?)
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        Self::new(ChartKind::Torus { major, minor }, ParamBox::cube(2, 0.0, 2.0 * PI)?)
    }

    /// Spherical coordinates over `[0, π] × [0, 2π]`.
    pub fn sphere() -> Self {
        Self::new(ChartKind::Sphere, ParamBox::new(vec![0.0, 0.0], vec![PI, 2.0 * PI]).unwrap())
            .expect("sphere chart is valid")
    }

    pub fn hemisphere(upper: bool) -> Self {
        Self::new(ChartKind::Hemisphere { upper }, ParamBox::cube(2, -1.0, 1.0).unwrap())
            .expect("hemisphere chart is valid")
    }

    pub fn with_domain(mut self, domain: ParamBox) -> Result<Self> {
        if domain.dim() != self.param_dim() {
            return Err(Error::InvalidArgument("domain dimension mismatch".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn domain(&self) -> &ParamBox {
        &self.domain
    }

    /// Parameter dimension m.
    pub fn param_dim(&self) -> usize {
        self.domain.dim()
    }

    /// Ambient dimension N.
    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            ChartKind::Circle { .. } => 2,
            ChartKind::Torus { .. } | ChartKind::Sphere | ChartKind::Hemisphere { .. } => 3,
            ChartKind::Linear { matrix } => matrix.nrows(),
            ChartKind::Custom { ambient_dim, .. } => *ambient_dim,
        }
    }

    /// Whether `x` is a valid parameter: inside the box, and inside the open
    /// unit disc for hemisphere charts.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        if !self.domain.contains(x) {
            return false;
        }
        match self.kind {
            ChartKind::Hemisphere { .. } => x[0] * x[0] + x[1] * x[1] < 1.0,
            _ => true,
        }
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.param_dim() {
            return Err(Error::InvalidArgument(format!(
                "parameter has dimension {}, chart expects {}",
                x.len(),
                self.param_dim()
            )));
        }
        if !self.in_domain(x) {
            return Err(Error::Domain(format!("{x:?} not in {:?}..{:?}", self.domain.lo, self.domain.hi)));
        }
        Ok(())
    }

    /// φ(x) without domain checks.
    pub(crate) fn map_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            ChartKind::Circle { radius } => vec![radius * x[0].cos(), radius * x[0].sin()],
            ChartKind::Torus { major, minor } => {
                let ring = major + minor * x[1].cos();
                vec![ring * x[0].cos(), ring * x[0].sin(), minor * x[1].sin()]
            }
            ChartKind::Sphere => {
                let (st, ct) = x[0].sin_cos();
                vec![st * x[1].cos(), st * x[1].sin(), ct]
            }
            ChartKind::Hemisphere { upper } => {
                let h = (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).sqrt();
                vec![x[0], x[1], if *upper { h } else { -h }]
            }
            ChartKind::Linear { matrix } => (matrix * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec(),
            ChartKind::Custom { map, .. } => map(x),
        }
    }

    /// φ(x).
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        Ok(self.map_unchecked(x))
    }

    /// The `N × m` Jacobian of φ at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        Ok(self.jacobian_unchecked(x))
    }

    pub(crate) fn jacobian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            ChartKind::Circle { radius } => {
                let (s, c) = x[0].sin_cos();
                DMatrix::from_column_slice(2, 1, &[-radius * s, radius * c])
            }
            ChartKind::Torus { major, minor } => {
                let (su, cu) = x[0].sin_cos();
                let (sv, cv) = x[1].sin_cos();
                let ring = major + minor * cv;
                DMatrix::from_column_slice(
                    3,
                    2,
                    &[-ring * su, ring * cu, 0.0, -minor * sv * cu, -minor * sv * su, minor * cv],
                )
            }
            ChartKind::Sphere => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                DMatrix::from_column_slice(3, 2, &[ct * cp, ct * sp, -st, -st * sp, st * cp, 0.0])
            }
            ChartKind::Hemisphere { upper } => {
                let h = (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt();
                let sign = if *upper { -1.0 } else { 1.0 };
                DMatrix::from_column_slice(3, 2, &[1.0, 0.0, sign * x[0] / h, 0.0, 1.0, sign * x[1] / h])
            }
            ChartKind::Linear { matrix } => matrix.clone(),
            ChartKind::Custom { .. } => self.finite_difference_jacobian(x),
        }
    }

    fn finite_difference_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let step = TOLERANCES.finite_difference_step;
        let n = self.ambient_dim();
        let mut jac = DMatrix::zeros(n, self.param_dim());
        let mut probe = x.to_vec();
        for col in 0..self.param_dim() {
            probe[col] = x[col] + step;
            let plus = self.map_unchecked(&probe);
            probe[col] = x[col] - step;
            let minus = self.map_unchecked(&probe);
            probe[col] = x[col];
            for row in 0..n {
                jac[(row, col)] = (plus[row] - minus[row]) / (2.0 * step);
            }
        }
        jac
    }

    /// `√det(JᵗJ)` at `x`; fails when J is numerically rank deficient.
    pub fn jacobian_density(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        self.jacobian_density_unchecked(x)
    }

    pub(crate) fn jacobian_density_unchecked(&self, x: &[f64]) -> Result<f64> {
        let jac = self.jacobian_unchecked(x);
        let gram = jac.transpose() * &jac;
        let smallest = gram.clone().symmetric_eigenvalues().min().max(0.0).sqrt();
        if !(smallest > TOLERANCES.rank_cutoff) {
            return Err(Error::DegenerateChart(smallest));
        }
        Ok(gram.determinant().max(0.0).sqrt())
    }

    /// Distance from `p` to the manifold for built-in charts (`None` otherwise).
    pub fn implicit_residual(&self, p: &[f64]) -> Option<f64> {
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        match &self.kind {
            ChartKind::Circle { radius } => Some((norm(p) - radius).abs()),
            ChartKind::Sphere | ChartKind::Hemisphere { .. } => Some((norm(p) - 1.0).abs()),
            ChartKind::Torus { major, minor } => {
                let ring = (p[0] * p[0] + p[1] * p[1]).sqrt() - major;
                Some(((ring * ring + p[2] * p[2]).sqrt() - minor).abs())
            }
            _ => None,
        }
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive, got {v}")))
    }
}

/// Declarative chart description used by atlas config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChartConfig {
    Circle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        domain: Option<ParamBox>,
    },
    Torus {
        major: f64,
        minor: f64,
        #[serde(default)]
        domain: Option<ParamBox>,
    },
    Sphere {
        #[serde(default)]
        domain: Option<ParamBox>,
    },
    Hemisphere {
        upper: bool,
    },
    Linear {
        /// Row-major `N × m` matrix.
        rows: Vec<Vec<f64>>,
        domain: ParamBox,
    },
}

fn one() -> f64 {
    1.0
}

impl ChartConfig {
    pub fn build(&self) -> Result<Chart> {
        let chart = match self {
            ChartConfig::Circle { radius, domain } => with_optional(Chart::circle(*radius)?, domain)?,
            ChartConfig::Torus { major, minor, domain } => with_optional(Chart::torus(*major, *minor)?, domain)?,
            ChartConfig::Sphere { domain } => with_optional(Chart::sphere(), domain)?,
            ChartConfig::Hemisphere { upper } => Chart::hemisphere(*upper),
            ChartConfig::Linear { rows, domain } => {
                let n = rows.len();
                let m = rows.first().map_or(0, Vec::len);
                if n == 0 || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::InvalidArgument("ragged linear chart matrix".into()));
                }
                let matrix = DMatrix::from_row_iterator(n, m, rows.iter().flatten().copied());
                Chart::new(ChartKind::Linear { matrix }, domain.clone())?
            }
        };
        Ok(chart)
    }
}

fn with_optional(chart: Chart, domain: &Option<ParamBox>) -> Result<Chart> {
    match domain {
        Some(d) => chart.with_domain(d.clone()),
        None => Ok(chart),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn embed_examples() {
        assert!(close(&Chart::unit_circle().embed(&[0.0]).unwrap(), &[1.0, 0.0], 1e-15));
        assert!(close(&Chart::sphere().embed(&[PI / 2.0, 0.0]).unwrap(), &[1.0, 0.0, 0.0], 1e-15));
        assert!(close(&Chart::torus(2.0, 1.0).unwrap().embed(&[0.0, 0.0]).unwrap(), &[3.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn embed_rejects_out_of_domain() {
        assert!(matches!(Chart::unit_circle().embed(&[7.0]), Err(Error::Domain(_))));
        assert!(matches!(Chart::hemisphere(true).embed(&[0.9, 0.9]), Err(Error::Domain(_))));
        assert!(matches!(Chart::unit_circle().embed(&[0.0, 1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn jacobian_density_examples() {
        let circle = Chart::unit_circle();
        for i in 0..100 {
            let t = 2.0 * PI * i as f64 / 100.0;
            assert!((circle.jacobian_density(&[t]).unwrap() - 1.0).abs() < 1e-9);
        }
        let big = Chart::circle(2.0).unwrap();
        assert!((big.jacobian_density(&[0.3]).unwrap() - 2.0).abs() < 1e-12);

        let a = DMatrix::<f64>::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 1.0]);
        let expected: f64 = (a.transpose() * &a).determinant();
        let expected = expected.sqrt();
        let lin = Chart::new(ChartKind::Linear { matrix: a }, ParamBox::cube(2, -1.0, 1.0).unwrap()).unwrap();
        for x in [[0.0, 0.0], [0.5, -0.25]] {
            assert!((lin.jacobian_density(&x).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let charts = [Chart::torus(2.0, 1.0).unwrap(), Chart::sphere(), Chart::hemisphere(false)];
        let probes = [[0.7, 1.3], [1.1, 2.0], [0.2, -0.3]];
        for (chart, x) in charts.iter().zip(probes) {
            let analytic = chart.jacobian(&x).unwrap();
            let fd = chart.finite_difference_jacobian(&x);
            assert!((analytic - fd).abs().max() < 1e-7, "{:?}", chart.kind());
        }
    }

    #[test]
    fn torus_density_is_surface_element() {
        let torus = Chart::torus(2.0, 1.0).unwrap();
        let d = torus.jacobian_density(&[0.4, 1.0]).unwrap();
        assert!((d - (2.0 + 1.0f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn degenerate_chart_detected() {
        // Sphere coordinates collapse at the pole.
        assert!(matches!(Chart::sphere().jacobian_density(&[0.0, 1.0]), Err(Error::DegenerateChart(_))));
        let flat = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let chart = Chart::new(ChartKind::Linear { matrix: flat }, ParamBox::cube(2, 0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(chart.jacobian_density(&[0.5, 0.5]), Err(Error::DegenerateChart(_))));
    }

    #[test]
    fn custom_chart_uses_finite_differences() {
        let chart = Chart::new(
            ChartKind::Custom {
                name: "scaled-circle".into(),
                ambient_dim: 2,
                map: Arc::new(|x: &[f64]| vec![3.0 * x[0].cos(), 3.0 * x[0].sin()]),
            },
            ParamBox::new(vec![0.0], vec![2.0 * PI]).unwrap(),
        )
        .unwrap();
        assert!((chart.jacobian_density(&[1.0]).unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn midpoint_grid_visits_every_cell() {
        let b = ParamBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let mut count = 0;
        let mut vol = 0.0;
        b.for_each_midpoint(8, |x, dv| {
            assert!(b.contains(x));
            count += 1;
            vol += dv;
        });
        assert_eq!(count, 64);
        assert!((vol - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chart_config_round_trip() {
        let json = r#"{"kind":"torus","major":2.0,"minor":1.0}"#;
        let cfg: ChartConfig = serde_json::from_str(json).unwrap();
        let chart = cfg.build().unwrap();
        assert_eq!(chart.ambient_dim(), 3);
        assert_eq!(chart.param_dim(), 2);
    }
}
