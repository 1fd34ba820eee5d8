//! Fixed numerical tolerances shared by every module.

/// All numeric cutoffs in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Smallest singular value of a chart Jacobian below which the chart is rank deficient.
    pub rank_cutoff: f64,
    /// Absolute tolerance for metric-axiom checks.
    pub metric_check: f64,
    /// Step of central finite differences for user-supplied charts.
    pub finite_difference_step: f64,
    /// Relative slack for the in-ball test inside the miniball recursion.
    pub miniball_slack: f64,
    /// Allowed deviation of total manifold mass from 1.
    pub quadrature_mass: f64,
    /// Relative change between the coarse and fine quadrature grids that triggers a warning.
    pub quadrature_convergence: f64,
    /// Midpoint quadrature cells per parameter axis.
    pub quadrature_cells: usize,
    /// Rejection sampling aborts below this acceptance rate.
    pub min_acceptance: f64,
    /// Proposals in one rejection probe batch.
    pub acceptance_probe: usize,
}

pub const TOLERANCES: Tolerances = Tolerances {
    rank_cutoff: 1e-8,
    metric_check: 1e-9,
    finite_difference_step: 1e-6,
    miniball_slack: 1e-12,
    quadrature_mass: 1e-3,
    quadrature_convergence: 1e-3,
    quadrature_cells: 256,
    min_acceptance: 1e-4,
    acceptance_probe: 100_000,
};
