//! The eikonal equation `|Du| = f` on the metric network `S^n`, the union of
//! the level-`n` edges as segments, with Dirichlet data on a boundary set.
//!
//! The solution is `u(x) = inf { ∫ f along ξ + g(y) }` over paths from `x` to
//! a boundary vertex `y`. Since `f > 0`, optimal paths cross every edge
//! monotonically, so the vertex values are shortest paths with edge weights
//! `c_e = ∫_e f ds`, and on an edge `(A, B)` of length `h`
//! `u(x_s) = min(u(A) + ∫_0^s f, u(B) + ∫_s^h f)`.

use crate::boundary::BoundaryData;
use crate::discrete::{incompatible, pairwise_compat, Prepared, SolveOptions, TOL};
use crate::error::{Error, Result};
use crate::fieldexpr::ScalarField;
use crate::gasket::PrefractalGraph;
use crate::metric::distance_to_set;
use crate::par;
use crate::quadrature::{edge_cost, edge_integral, QuadratureConfig};
use crate::solution::{NodeSolution, PathCostConvention, SolverKind, VerifierReport, Witness};
use crate::sweep::{forward_costs, label_setting};

/// Samples per edge used by the on-edge verifiers.
pub const EDGE_SAMPLES: usize = 16;

#[derive(Debug, Clone)]
pub struct NetworkSolution {
    pub vertex_values: NodeSolution,
    /// `c_e`, indexed by edge id.
    pub edge_costs: Vec<f64>,
    field: ScalarField,
    quadrature: QuadratureConfig,
}

impl NetworkSolution {
    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    /// `∫_0^s f` along edge `e` from its tail.
    pub fn partial_cost(&self, g: &PrefractalGraph, e: usize, s: f64) -> Result<f64> {
        self.check_arc(g, e, s)?;
        if s == g.h() {
            return Ok(self.edge_costs[e]);
        }
        edge_integral(g, &self.field, e, 0.0, s, &self.quadrature)
    }

    /// `u` at arclength `s` from the tail of edge `e`.
    pub fn eval_on_edge(&self, g: &PrefractalGraph, e: usize, s: f64) -> Result<f64> {
        self.check_arc(g, e, s)?;
        let edge = g.edge(e);
        let u = &self.vertex_values.values;
        let (from_tail, from_head) = if s == 0.0 {
            (0.0, self.edge_costs[e])
        } else if s == g.h() {
            (self.edge_costs[e], 0.0)
        } else {
            (
                edge_integral(g, &self.field, e, 0.0, s, &self.quadrature)?,
                edge_integral(g, &self.field, e, s, g.h(), &self.quadrature)?,
            )
        };
        Ok((u[edge.tail] + from_tail).min(u[edge.head] + from_head))
    }

    fn check_arc(&self, g: &PrefractalGraph, e: usize, s: f64) -> Result<()> {
        if e >= g.edge_count() || self.edge_costs.len() != g.edge_count() {
            return Err(Error::InvalidArgument(format!("edge {e} is not an edge of the solved graph")));
        }
        if !(0.0..=g.h()).contains(&s) {
            return Err(Error::InvalidArgument(format!("arclength {s} outside [0, {}]", g.h())));
        }
        Ok(())
    }
}

/// `c_e` for every edge.
pub fn edge_costs(g: &PrefractalGraph, f: &ScalarField, q: &QuadratureConfig) -> Result<Vec<f64>> {
    q.validate()?;
    par::try_map_range(g.edge_count(), |e| edge_cost(g, f, e, q))
}

pub fn solve_network(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, q: &QuadratureConfig) -> Result<NetworkSolution> {
    solve_network_with(g, f, gb, q, SolveOptions::default())
}

pub fn solve_network_with(
    g: &PrefractalGraph,
    f: &ScalarField,
    gb: &BoundaryData,
    q: &QuadratureConfig,
    opts: SolveOptions,
) -> Result<NetworkSolution> {
    let prep = Prepared::new(g, f, gb)?;
    let costs = edge_costs(g, f, q)?;
    let compat = pairwise_compat(g, &prep.bd, "compat_network", |src| forward_costs(g, src, |_, nb| costs[nb.edge]));
    if opts.strict && !compat.passed {
        return Err(incompatible(&compat));
    }
    let values = label_setting(g, &prep.bd, |_, nb| costs[nb.edge]);
    if let Some(v) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Unreachable(v));
    }
    let mut warnings = Vec::new();
    if !compat.passed {
        warnings.push(format!("boundary data incompatible: {compat}"));
    }
    Ok(NetworkSolution {
        vertex_values: NodeSolution {
            dim: g.dim(),
            level: g.level(),
            values,
            boundary: prep.bd,
            convention: PathCostConvention::EdgeIntegral,
            solver: SolverKind::Network,
            compat: Some(compat),
            warnings,
        },
        edge_costs: costs,
        field: f.clone(),
        quadrature: *q,
    })
}

/// Pairwise boundary check `g(x) ≤ C(x → y) + g(y)` with `C` the cheapest
/// edge-cost path.
pub fn check_compat_network(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, q: &QuadratureConfig) -> Result<VerifierReport> {
    let prep = Prepared::new(g, f, gb)?;
    let costs = edge_costs(g, f, q)?;
    Ok(pairwise_compat(g, &prep.bd, "compat_network", |src| forward_costs(g, src, |_, nb| costs[nb.edge])))
}

/// Graph compatibility at every level is expected to carry over to the
/// network. Fails only when every `discrete` report passed but `network` did not.
pub fn compat_implication(discrete: &[VerifierReport], network: &VerifierReport) -> VerifierReport {
    let premise = !discrete.is_empty() && discrete.iter().all(|r| r.passed);
    let mut report = VerifierReport::new("compat_implication", 0.0);
    report.observe(if premise && !network.passed { 1.0 } else { 0.0 }, || {
        network.witness.clone().unwrap_or_else(|| discrete[0].witness.clone().expect("reports carry a witness"))
    });
    report
}

/// Points `k h / (m + 1)`, `k = 0..=m+1`, along an edge.
fn edge_samples(h: f64, m: usize) -> Vec<f64> {
    (0..=m + 1)
        .map(|k| if k == m + 1 { h } else { h * k as f64 / (m + 1) as f64 })
        .collect()
}

/// Largest sampled value of `f` over the network.
fn sampled_max(g: &PrefractalGraph, f: &ScalarField) -> Result<f64> {
    let per_edge = par::try_map_range(g.edge_count(), |e| {
        edge_samples(g.h(), EDGE_SAMPLES)
            .into_iter()
            .map(|s| Ok(f.eval(&g.edge_point(e, s))?.abs()))
            .try_fold(0.0f64, |acc, v: Result<f64>| Ok::<_, Error>(acc.max(v?)))
    })?;
    Ok(per_edge.into_iter().fold(0.0, f64::max))
}

/// Bound `|u(x)| ≤ max|g| + max|f| δ_n(x, Γ)` at every vertex and edge midpoint.
pub fn barrier_check(g: &PrefractalGraph, sol: &NetworkSolution, gb: &BoundaryData, tol: f64) -> Result<VerifierReport> {
    let bd = gb.resolve(g)?;
    let ids: Vec<usize> = bd.iter().map(|&(v, _)| v).collect();
    let dist = distance_to_set(g, &ids)?;
    let m = gb.max_abs();
    let fmax = sampled_max(g, sol.field())?;
    let u = &sol.vertex_values.values;
    let mut report = VerifierReport::new("network_barrier_bound", tol);
    for x in 0..g.vertex_count() {
        report.observe(u[x].abs() - (m + fmax * dist[x]), || Witness::Vertex(g.key(x).clone()));
    }
    let h = g.h();
    let mids = par::try_map_range(g.edge_count(), |e| sol.eval_on_edge(g, e, 0.5 * h))?;
    for (e, edge) in g.edges().iter().enumerate() {
        let delta = dist[edge.tail].min(dist[edge.head]) + 0.5 * h;
        report.observe(mids[e].abs() - (m + fmax * delta), || {
            Witness::OnEdge(g.key(edge.tail).clone(), g.key(edge.head).clone())
        });
    }
    Ok(report)
}

/// `|u(x) - u(x')| ≤ ∫_x^{x'} f` between consecutive sample points of every edge.
pub fn check_integrated_lipschitz(g: &PrefractalGraph, sol: &NetworkSolution, samples: usize, tol: f64) -> Result<VerifierReport> {
    let q = sol.quadrature;
    let per_edge = par::try_map_range(g.edge_count(), |e| {
        let s = edge_samples(g.h(), samples);
        let mut worst = f64::NEG_INFINITY;
        let mut prev = sol.eval_on_edge(g, e, s[0])?;
        for w in s.windows(2) {
            let next = sol.eval_on_edge(g, e, w[1])?;
            let between = edge_integral(g, sol.field(), e, w[0], w[1], &q)?;
            worst = worst.max((next - prev).abs() - between);
            prev = next;
        }
        Ok::<_, Error>(worst)
    })?;
    let mut report = VerifierReport::new("integrated_lipschitz", tol);
    for (e, v) in per_edge.into_iter().enumerate() {
        let edge = g.edge(e);
        report.observe(v, || Witness::OnEdge(g.key(edge.tail).clone(), g.key(edge.head).clone()));
    }
    Ok(report)
}

/// `|u(A) - u(B)| ≤ c_e` on every edge.
pub fn check_edge_lipschitz(g: &PrefractalGraph, sol: &NetworkSolution) -> VerifierReport {
    let u = &sol.vertex_values.values;
    let mut report = VerifierReport::new("edge_lipschitz", TOL);
    for (e, edge) in g.edges().iter().enumerate() {
        report.observe((u[edge.tail] - u[edge.head]).abs() - sol.edge_costs[e], || {
            Witness::OnEdge(g.key(edge.tail).clone(), g.key(edge.head).clone())
        });
    }
    report
}

/// `|u(x) - min_{y~x} (u(y) + c_xy)|` at interior vertices: the vertex form
/// of the network equation.
pub fn check_network_equation(g: &PrefractalGraph, sol: &NetworkSolution, tol: f64) -> VerifierReport {
    let u = &sol.vertex_values.values;
    let mut is_boundary = vec![false; g.vertex_count()];
    for &(v, _) in &sol.vertex_values.boundary {
        is_boundary[v] = true;
    }
    let mut report = VerifierReport::new("network_equation", tol);
    for x in 0..g.vertex_count() {
        if is_boundary[x] {
            continue;
        }
        let best = g
            .neighbors(x)
            .iter()
            .map(|nb| u[nb.vertex] + sol.edge_costs[nb.edge])
            .fold(f64::INFINITY, f64::min);
        report.observe((u[x] - best).abs(), || Witness::Vertex(g.key(x).clone()));
    }
    if report.witness.is_none() {
        return VerifierReport::vacuous("network_equation", tol);
    }
    report
}

/// Every network verifier on vertex values `u`: the vertex equation, the
/// edge Lipschitz bound, the barrier bound at vertices and edge midpoints and
/// boundary compatibility.
pub fn network_battery(
    g: &PrefractalGraph,
    f: &ScalarField,
    gb: &BoundaryData,
    u: &[f64],
    q: &QuadratureConfig,
    tol: f64,
) -> Result<Vec<VerifierReport>> {
    if u.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "vertex function has {} values, graph has {} vertices",
            u.len(),
            g.vertex_count()
        )));
    }
    let prep = Prepared::new(g, f, gb)?;
    let costs = edge_costs(g, f, q)?;
    let compat = pairwise_compat(g, &prep.bd, "compat_network", |src| forward_costs(g, src, |_, nb| costs[nb.edge]));
    let sol = NetworkSolution {
        vertex_values: NodeSolution {
            dim: g.dim(),
            level: g.level(),
            values: u.to_vec(),
            boundary: prep.bd,
            convention: PathCostConvention::EdgeIntegral,
            solver: SolverKind::Derived,
            compat: None,
            warnings: Vec::new(),
        },
        edge_costs: costs,
        field: f.clone(),
        quadrature: *q,
    };
    let mut lipschitz = check_edge_lipschitz(g, &sol);
    lipschitz.tolerance = tol;
    lipschitz.passed = lipschitz.worst_violation <= tol;
    Ok(vec![
        check_network_equation(g, &sol, tol),
        lipschitz,
        barrier_check(g, &sol, gb, tol)?,
        compat,
    ])
}
