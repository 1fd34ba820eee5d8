use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::chart::{Chart, ChartConfig, ParamBox};
use crate::error::{Error, Result};
use crate::tolerances::TOLERANCES;

/// One piece `C_i ⊂ V_i` of the disjoint decomposition of the manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct AtlasPiece {
    pub chart: usize,
    pub region: ParamBox,
}

/// Probability density κ with respect to the manifold volume form.
#[derive(Clone)]
pub enum ManifoldDensity {
    /// κ ≡ 1 / vol(M).
    Uniform,
    /// κ ∝ w(z); the normalizing constant is found by quadrature.
    Weighted { name: String, weight: super::ScalarField },
    /// κ given directly; must integrate to one.
    Exact { name: String, kappa: super::ScalarField },
}

impl fmt::Debug for ManifoldDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldDensity::Uniform => write!(f, "Uniform"),
            ManifoldDensity::Weighted { name, .. } => write!(f, "Weighted({name})"),
            ManifoldDensity::Exact { name, .. } => write!(f, "Exact({name})"),
        }
    }
}

/// Result of a midpoint quadrature at two resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub coarse: f64,
}

impl Quadrature {
    pub fn relative_change(&self) -> f64 {
        (self.value - self.coarse).abs() / self.value.abs().max(f64::MIN_POSITIVE)
    }

    pub fn is_resolved(&self) -> bool {
        self.relative_change() <= TOLERANCES.quadrature_convergence
    }
}

/// A finite atlas of an m-dimensional compact manifold in ℝᴺ together with a
/// sampling density κ.
#[derive(Debug, Clone)]
pub struct ChartAtlas {
    name: String,
    charts: Vec<Arc<Chart>>,
    pieces: Vec<AtlasPiece>,
    density: ManifoldDensity,
    /// κ(z) = scale · raw(z), where raw is 1, w or κ depending on the density.
    scale: f64,
    piece_masses: Vec<f64>,
    envelopes: Vec<f64>,
}

impl ChartAtlas {
    /// Builds and validates an atlas. `envelope` overrides the per-piece
    /// rejection bound on `κ(φ(x)) D_φ(x)`.
    pub fn new(
        name: impl Into<String>,
        charts: Vec<Chart>,
        pieces: Vec<AtlasPiece>,
        density: ManifoldDensity,
        envelope: Option<f64>,
    ) -> Result<Self> {
        if charts.is_empty() || pieces.is_empty() {
            return Err(Error::InvalidArgument("atlas needs at least one chart and one piece".into()));
        }
        let (m, n) = (charts[0].param_dim(), charts[0].ambient_dim());
        if charts.iter().any(|c| c.param_dim() != m || c.ambient_dim() != n) {
            return Err(Error::InvalidArgument("charts disagree on dimensions".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            let chart = charts
                .get(p.chart)
                .ok_or_else(|| Error::InvalidArgument(format!("piece {i} refers to missing chart {}", p.chart)))?;
            if !p.region.is_subset_of(chart.domain()) {
                return Err(Error::InvalidArgument(format!("piece {i} leaves its chart domain")));
            }
            for (j, q) in pieces.iter().enumerate().take(i) {
                if q.chart == p.chart && q.region.overlaps(&p.region) {
                    return Err(Error::InvalidArgument(format!("pieces {j} and {i} overlap")));
                }
            }
        }
        let mut atlas = Self {
            name: name.into(),
            charts: charts.into_iter().map(Arc::new).collect(),
            pieces,
            density,
            scale: 1.0,
            piece_masses: Vec::new(),
            envelopes: Vec::new(),
        };

        let raw_masses = atlas.raw_piece_integrals(TOLERANCES.quadrature_cells)?;
        let raw_total: f64 = raw_masses.iter().sum();
        if !(raw_total > 0.0 && raw_total.is_finite()) {
            return Err(Error::InvalidDensity(format!("density has total mass {raw_total}")));
        }
        atlas.scale = match &atlas.density {
            ManifoldDensity::Exact { .. } => {
                if (raw_total - 1.0).abs() > TOLERANCES.quadrature_mass {
                    return Err(Error::InvalidDensity(format!("κ integrates to {raw_total}, not 1")));
                }
                1.0
            }
            _ => 1.0 / raw_total,
        };
        atlas.piece_masses = raw_masses.iter().map(|v| v * atlas.scale).collect();
        atlas.envelopes = match envelope {
            Some(e) if e > 0.0 => vec![e; atlas.pieces.len()],
            Some(e) => return Err(Error::InvalidDensity(format!("envelope {e} must be positive"))),
            None => atlas.grid_maxima()?.into_iter().map(|v| 1.25 * v).collect(),
        };
        Ok(atlas)
    }

    /// Unit circle in ℝ² with the uniform density.
    pub fn circle() -> Self {
        Self::circle_with_radius(1.0).expect("unit circle atlas")
    }

    pub fn circle_with_radius(radius: f64) -> Result<Self> {
        let chart = Chart::circle(radius)?;
        let region = chart.domain().clone();
        Self::new("circle", vec![chart], vec![AtlasPiece { chart: 0, region }], ManifoldDensity::Uniform, None)
    }

    /// Torus of revolution in ℝ³ with the uniform surface density.
    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        let chart = Chart::torus(major, minor)?;
        let region = chart.domain().clone();
        Self::new("torus", vec![chart], vec![AtlasPiece { chart: 0, region }], ManifoldDensity::Uniform, None)
    }

    /// Unit sphere in ℝ³ (spherical coordinates) with the uniform density.
    pub fn sphere() -> Self {
        let chart = Chart::sphere();
        let region = chart.domain().clone();
        Self::new("sphere", vec![chart], vec![AtlasPiece { chart: 0, region }], ManifoldDensity::Uniform, None)
            .expect("sphere atlas")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn charts(&self) -> &[Arc<Chart>] {
        &self.charts
    }

    pub fn pieces(&self) -> &[AtlasPiece] {
        &self.pieces
    }

    pub fn density(&self) -> &ManifoldDensity {
        &self.density
    }

    pub fn manifold_dim(&self) -> usize {
        self.charts[0].param_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.charts[0].ambient_dim()
    }

    /// `∫_{C_i} κ(φ_i(x)) D_φi(x) dx` for each piece.
    pub fn piece_masses(&self) -> &[f64] {
        &self.piece_masses
    }

    pub fn total_mass(&self) -> f64 {
        self.piece_masses.iter().sum()
    }

    /// Rejection bound on `κ(φ_i(x)) D_φi(x)` over piece `i`.
    pub fn envelope(&self, piece: usize) -> f64 {
        self.envelopes[piece]
    }

    /// κ at an embedded point.
    pub fn kappa(&self, z: &[f64]) -> f64 {
        let raw = match &self.density {
            ManifoldDensity::Uniform => 1.0,
            ManifoldDensity::Weighted { weight, .. } => weight(z),
            ManifoldDensity::Exact { kappa, .. } => kappa(z),
        };
        self.scale * raw
    }

    /// Residual of the implicit equation of the first chart's manifold.
    pub fn implicit_residual(&self, p: &[f64]) -> Option<f64> {
        self.charts[0].implicit_residual(p)
    }

    fn for_each_node(&self, piece: usize, cells: usize, mut f: impl FnMut(&[f64], &[f64], f64, f64)) -> Result<()> {
        let p = &self.pieces[piece];
        let chart = &self.charts[p.chart];
        let mut err = None;
        p.region.for_each_midpoint(cells, |x, dv| {
            if err.is_some() || !chart.in_domain(x) {
                return;
            }
            match chart.jacobian_density_unchecked(x) {
                Ok(jd) => f(x, &chart.map_unchecked(x), jd, dv),
                Err(e) => err = Some(e),
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn raw_piece_integrals(&self, cells: usize) -> Result<Vec<f64>> {
        (0..self.pieces.len())
            .map(|i| {
                let mut sum = 0.0;
                self.for_each_node(i, cells, |_, z, jd, dv| sum += self.kappa(z) * jd * dv)?;
                if !(sum >= 0.0) {
                    return Err(Error::InvalidDensity("negative density".into()));
                }
                Ok(sum)
            })
            .collect()
    }

    fn grid_maxima(&self) -> Result<Vec<f64>> {
        (0..self.pieces.len())
            .map(|i| {
                let mut max = 0.0f64;
                self.for_each_node(i, TOLERANCES.quadrature_cells, |_, z, jd, _| max = max.max(self.kappa(z) * jd))?;
                Ok(max)
            })
            .collect()
    }

    /// `Σ_i ∫_{C_i} g(κ(φ_i(x))) D_φi(x) dx` at `cells` per axis.
    pub fn integrate_with(&self, cells: usize, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.pieces.len() {
            self.for_each_node(i, cells, |_, z, jd, dv| total += g(self.kappa(z)) * jd * dv)?;
        }
        Ok(total)
    }

    /// Midpoint quadrature at the default resolution, with the half-resolution
    /// value kept for a convergence check.
    pub fn integrate(&self, g: &dyn Fn(f64) -> f64) -> Result<Quadrature> {
        let cells = TOLERANCES.quadrature_cells;
        Ok(Quadrature { value: self.integrate_with(cells, g)?, coarse: self.integrate_with(cells / 2, g)? })
    }
}

/// Identifier of a density in atlas config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum KappaConfig {
    #[default]
    Uniform,
    /// κ ∝ exp(strength · z[axis]).
    Tilted { axis: usize, strength: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceConfig {
    pub chart: usize,
    pub region: ParamBox,
}

/// JSON description of an atlas.
///
/// ```json
/// {"name": "torus", "charts": [{"kind": "torus", "major": 2.0, "minor": 1.0}], "density": "uniform"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub charts: Vec<ChartConfig>,
    /// Defaults to one piece per chart covering its whole domain.
    #[serde(default)]
    pub pieces: Option<Vec<PieceConfig>>,
    #[serde(default)]
    pub density: KappaConfig,
    #[serde(default)]
    pub envelope: Option<f64>,
}

fn default_name() -> String {
    "custom".into()
}

impl AtlasConfig {
    /// Built-in manifolds by name: `circle`, `torus` (R=2, r=1), `sphere`.
    pub fn preset(name: &str) -> Result<Self> {
        let chart = match name {
            "circle" => ChartConfig::Circle { radius: 1.0, domain: None },
            "torus" => ChartConfig::Torus { major: 2.0, minor: 1.0, domain: None },
            "sphere" => ChartConfig::Sphere { domain: None },
            other => return Err(Error::InvalidArgument(format!("unknown manifold '{other}'"))),
        };
        Ok(Self { name: name.into(), charts: vec![chart], pieces: None, density: KappaConfig::Uniform, envelope: None })
    }

    pub fn build(&self) -> Result<ChartAtlas> {
        let charts = self.charts.iter().map(ChartConfig::build).collect::<Result<Vec<_>>>()?;
        let pieces = match &self.pieces {
            Some(p) => p.iter().map(|p| AtlasPiece { chart: p.chart, region: p.region.clone() }).collect(),
            None => {
                charts.iter().enumerate().map(|(i, c)| AtlasPiece { chart: i, region: c.domain().clone() }).collect()
            }
        };
        let density = match self.density {
            KappaConfig::Uniform => ManifoldDensity::Uniform,
            KappaConfig::Tilted { axis, strength } => {
                let n = charts.first().map_or(0, Chart::ambient_dim);
                if axis >= n {
                    return Err(Error::InvalidDensity(format!("tilt axis {axis} outside ℝ^{n}")));
                }
                ManifoldDensity::Weighted {
                    name: format!("tilted({axis},{strength})"),
                    weight: Arc::new(move |z: &[f64]| (strength * z[axis]).exp()),
                }
            }
        };
        ChartAtlas::new(self.name.clone(), charts, pieces, density, self.envelope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn builtin_atlases_are_normalized() {
        for atlas in [ChartAtlas::circle(), ChartAtlas::torus(2.0, 1.0).unwrap(), ChartAtlas::sphere()] {
            assert!((atlas.total_mass() - 1.0).abs() < 1e-3, "{}", atlas.name());
        }
    }

    #[test]
    fn uniform_kappa_is_inverse_volume() {
        assert!((ChartAtlas::circle().kappa(&[1.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-9);
        let torus = ChartAtlas::torus(2.0, 1.0).unwrap();
        assert!((torus.kappa(&[3.0, 0.0, 0.0]) - 1.0 / (8.0 * PI * PI)).abs() < 1e-9);
        assert!((ChartAtlas::sphere().kappa(&[0.0, 0.0, 1.0]) - 1.0 / (4.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn limit_integral_examples() {
        let circle = ChartAtlas::circle();
        let length = circle.integrate(&|_| 1.0).unwrap();
        assert!((length.value - 2.0 * PI).abs() < 1e-9 && length.is_resolved());
        assert!((circle.integrate(&|k| k).unwrap().value - 1.0).abs() < 1e-9);
        assert!((circle.integrate(&|k| k * k).unwrap().value - 1.0 / (2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn exact_density_must_integrate_to_one() {
        let chart = Chart::unit_circle();
        let region = chart.domain().clone();
        let bad = ManifoldDensity::Exact { name: "half".into(), kappa: Arc::new(|_: &[f64]| 0.5 / PI * 0.5) };
        let err =
            ChartAtlas::new("c", vec![chart.clone()], vec![AtlasPiece { chart: 0, region: region.clone() }], bad, None);
        assert!(matches!(err, Err(Error::InvalidDensity(_))));
        let good = ManifoldDensity::Exact { name: "u".into(), kappa: Arc::new(|_: &[f64]| 0.5 / PI) };
        assert!(ChartAtlas::new("c", vec![chart], vec![AtlasPiece { chart: 0, region }], good, None).is_ok());
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let chart = Chart::unit_circle();
        let a = ParamBox::new(vec![0.0], vec![4.0]).unwrap();
        let b = ParamBox::new(vec![3.0], vec![6.0]).unwrap();
        let c = ParamBox::new(vec![4.0], vec![6.0]).unwrap();
        let pieces = |r: ParamBox| vec![AtlasPiece { chart: 0, region: a.clone() }, AtlasPiece { chart: 0, region: r }];
        assert!(ChartAtlas::new("x", vec![chart.clone()], pieces(b), ManifoldDensity::Uniform, None).is_err());
        assert!(ChartAtlas::new("x", vec![chart], pieces(c), ManifoldDensity::Uniform, None).is_ok());
    }

    #[test]
    fn two_piece_circle_matches_single_piece() {
        let chart = Chart::unit_circle();
        let pieces = vec![
            AtlasPiece { chart: 0, region: ParamBox::new(vec![0.0], vec![PI]).unwrap() },
            AtlasPiece { chart: 0, region: ParamBox::new(vec![PI], vec![2.0 * PI]).unwrap() },
        ];
        let atlas = ChartAtlas::new("halves", vec![chart], pieces, ManifoldDensity::Uniform, None).unwrap();
        assert!((atlas.piece_masses()[0] - 0.5).abs() < 1e-9);
        assert!((atlas.kappa(&[0.0, 1.0]) - 1.0 / (2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn tilted_density_from_config() {
        let json = r#"{"charts":[{"kind":"circle"}],"density":{"tilted":{"axis":0,"strength":1.0}}}"#;
        let atlas: AtlasConfig = serde_json::from_str(json).unwrap();
        let atlas = atlas.build().unwrap();
        assert!((atlas.total_mass() - 1.0).abs() < 1e-9);
        assert!(atlas.kappa(&[1.0, 0.0]) > atlas.kappa(&[-1.0, 0.0]));
    }
}
