//! Eikonal equations on Sierpinski gasket prefractals.
//!
//! [`gasket`] builds the level-`n` prefractal graph with exact vertex keys.
//! [`discrete`] solves the graph problem `|Du|_n = f` and carries the
//! verifiers, [`network`] solves `|Du| = f` on the metric network with
//! edge-integral costs, [`metric`] computes graph and geodesic distances and
//! [`convergence`] tabulates the behavior of both solvers across levels.
//!
//! ```
//! use gasket_eikonal::{build_prefractal, solve_discrete, BoundaryData, ScalarField};
//!
//! let g = build_prefractal(2, 1).unwrap();
//! let u = solve_discrete(&g, &ScalarField::parse("1").unwrap(), &BoundaryData::zero(2)).unwrap();
//! assert_eq!(u.values.iter().cloned().fold(0.0, f64::max), 0.5);
//! ```

pub mod boundary;
pub mod convergence;
pub mod discrete;
pub mod error;
pub mod fieldexpr;
pub mod gasket;
pub mod instances;
pub mod io;
pub mod metric;
pub mod network;
pub mod par;
pub mod quadrature;
pub mod solution;
mod sweep;

pub use boundary::{BoundaryData, ResolvedBoundary};
pub use convergence::{
    fit_slope, rate_fit, repair_compatibility, run_levels, Column, ConvergenceOptions, ConvergenceRow, ConvergenceTable, Omega,
    RateFit,
};
pub use discrete::{
    brute_force_solution, check_adjacency, check_barrier, check_compat_discrete, check_kruzkov_bound, check_kruzkov_residual,
    check_subsolution, check_supersolution, discrete_gradient_norm, kruzkov_f, kruzkov_forward, kruzkov_rhs, solve_discrete,
    solve_discrete_with, upper_barrier, value_iteration, discrete_battery, SolveOptions, ValueIteration,
};
pub use error::{Error, Result};
pub use fieldexpr::{validate_positive, FieldExpr, ParseError, PositivityReport, ScalarField};
pub use gasket::{build_prefractal, refine, PrefractalGraph, VertexKey};
pub use metric::{boundary_distance, geodesic_estimate, vertex_distance, DistanceResult, Exactness, PointOnS, PointSpec};
pub use network::{
    barrier_check, check_compat_network, compat_implication, network_battery, solve_network, solve_network_with, NetworkSolution,
};
pub use quadrature::{edge_cost, QuadratureConfig};
pub use solution::{NodeSolution, PathCostConvention, SolverKind, VerifierReport, Witness};
