//! Čech complexes of random point clouds and the Betti-number limits of the
//! thermodynamic regime.
//!
//! Points are drawn from a density on Euclidean space or from a Riemannian
//! density on an embedded manifold, complexes are built at radius
//! `r_n = r · n^{−1/dim}`, and homology is computed over ℤ/2.

// NaN inputs must fail the `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cech;
mod error;
pub mod geometry;
pub mod harness;
pub mod homology;
pub mod limits;
pub mod rng;
pub mod sampling;
pub mod tolerances;

pub use cech::{cech_complex, cech_filtration, BuildOptions, Layer, SimplicialComplex};
pub use error::{Error, Result};
pub use geometry::{AtlasConfig, Chart, ChartAtlas, ChartConfig, MetricSpec, ParamBox};
pub use harness::{ExperimentConfig, ResultRecord};
pub use homology::{betti_numbers, persistent_betti, BettiVector, Persistence};
pub use limits::LimitEstimate;
pub use sampling::{DensityConfig, DensitySpec, PointCloud};
pub use tolerances::TOLERANCES;
