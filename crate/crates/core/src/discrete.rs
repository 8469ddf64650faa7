//! The graph eikonal problem `|Du|_n = f` on the interior vertices with
//! Dirichlet data on a boundary set, where
//! `|Du(x)|_n = max_{y ~ x} (u(x) - u(y)) / h_n`.
//!
//! The solution is the minimal path cost to the boundary,
//! `u(x) = min Σ_{k<N} h_n f(x_k) + g(x_N)` over vertex paths
//! `x = x_0 ~ x_1 ~ … ~ x_N` ending on the boundary set. The terminal vertex is
//! not charged, so at every interior vertex `u(x) = min_{y~x} u(y) + h_n f(x)`
//! holds exactly and `u = g` on the boundary whenever the data is compatible.
//!
//! Three independent routes compute it: a label-setting sweep
//! ([`solve_discrete`]), Jacobi value iteration from an upper barrier
//! ([`value_iteration`]) and exhaustive enumeration of simple paths
//! ([`brute_force_solution`]). The verifiers below check the equation, the
//! a priori bounds and the exponential (Kruzkov) reformulation on any vertex
//! function.

use crate::boundary::{BoundaryData, ResolvedBoundary};
use crate::error::{Error, Result};
use crate::fieldexpr::ScalarField;
use crate::gasket::PrefractalGraph;
use crate::metric::distance_to_set;
use crate::par;
use crate::solution::{NodeSolution, PathCostConvention, SolverKind, VerifierReport, Witness};
use crate::sweep::{forward_costs, label_setting};

/// Absolute tolerance used for equalities between O(1) values.
pub const TOL: f64 = 1e-12;

/// Largest graph [`brute_force_solution`] will enumerate (the level-3 triangle gasket).
pub const BRUTE_FORCE_MAX_VERTICES: usize = 42;

const BRUTE_FORCE_EXPANSIONS: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Fail with [`Error::Incompatible`] instead of solving incompatible data.
    pub strict: bool,
}

/// Data shared by the solvers and verifiers: `f` at every vertex and the
/// resolved boundary.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub fv: Vec<f64>,
    pub bd: ResolvedBoundary,
    pub is_boundary: Vec<bool>,
}

impl Prepared {
    pub fn new(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData) -> Result<Self> {
        let fv = f.positive_at_vertices(g)?;
        let bd = gb.resolve(g)?;
        if bd.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let mut is_boundary = vec![false; g.vertex_count()];
        for &(v, _) in &bd {
            is_boundary[v] = true;
        }
        Ok(Self { fv, bd, is_boundary })
    }

    pub fn max_f(&self) -> f64 {
        self.fv.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_g(&self) -> f64 {
        self.bd.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn boundary_ids(&self) -> Vec<usize> {
        self.bd.iter().map(|&(v, _)| v).collect()
    }
}

fn node_solution(g: &PrefractalGraph, values: Vec<f64>, bd: ResolvedBoundary, solver: SolverKind) -> NodeSolution {
    NodeSolution {
        dim: g.dim(),
        level: g.level(),
        values,
        boundary: bd,
        convention: PathCostConvention::ExcludeTerminal,
        solver,
        compat: None,
        warnings: Vec::new(),
    }
}

fn ensure_reached(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(v) => Err(Error::Unreachable(v)),
        None => Ok(()),
    }
}

/// `|Du(x)|_n`.
pub fn discrete_gradient_norm(g: &PrefractalGraph, u: &[f64], x: usize) -> Result<f64> {
    if x >= g.vertex_count() || u.len() != g.vertex_count() {
        return Err(Error::UnknownVertex(format!("id {x} (graph has {} vertices)", g.vertex_count())));
    }
    Ok(grad_norm(g, u, x))
}

fn grad_norm(g: &PrefractalGraph, u: &[f64], x: usize) -> f64 {
    g.neighbors(x)
        .iter()
        .map(|nb| (u[x] - u[nb.vertex]) / g.h())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Label-setting solve, solving incompatible data anyway (with a warning).
pub fn solve_discrete(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData) -> Result<NodeSolution> {
    solve_discrete_with(g, f, gb, SolveOptions::default())
}

pub fn solve_discrete_with(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, opts: SolveOptions) -> Result<NodeSolution> {
    let prep = Prepared::new(g, f, gb)?;
    let compat = compat_report(g, &prep);
    if opts.strict && !compat.passed {
        return Err(incompatible(&compat));
    }
    let h = g.h();
    let values = label_setting(g, &prep.bd, |x, _| h * prep.fv[x]);
    ensure_reached(&values)?;
    let mut sol = node_solution(g, values, prep.bd, SolverKind::Dijkstra);
    if !compat.passed {
        sol.warnings.push(format!("boundary data incompatible: {compat}"));
    }
    sol.compat = Some(compat);
    Ok(sol)
}

pub(crate) fn incompatible(report: &VerifierReport) -> Error {
    let (worse, better) = match &report.witness {
        Some(Witness::Pair(a, b)) => (a.to_string(), b.to_string()),
        other => (format!("{other:?}"), String::new()),
    };
    Error::Incompatible {
        worse,
        better,
        violation: report.worst_violation,
    }
}

/// Result of [`value_iteration`]: the solution, the number of sweeps and the
/// sup-norm change of every sweep.
#[derive(Debug, Clone)]
pub struct ValueIteration {
    pub solution: NodeSolution,
    pub sweeps: usize,
    pub residuals: Vec<f64>,
}

/// Upper barrier `u⁺(x) = max|g| + d_n(x) max f` (the distance taken to the boundary set).
pub fn upper_barrier(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData) -> Result<Vec<f64>> {
    let prep = Prepared::new(g, f, gb)?;
    barrier(g, &prep)
}

fn barrier(g: &PrefractalGraph, prep: &Prepared) -> Result<Vec<f64>> {
    let (m, fmax) = (prep.max_abs_g(), prep.max_f());
    Ok(distance_to_set(g, &prep.boundary_ids())?
        .into_iter()
        .map(|d| m + d * fmax)
        .collect())
}

/// Jacobi iteration of `u(x) ← min(g(x) on the boundary, min_{y~x} u(y) + h f(x))`
/// started from the upper barrier, until the sup-norm change is at most `tol`.
///
/// The barrier is a supersolution, so the iterates decrease monotonically; the
/// update is non-expansive, so the recorded changes do not increase.
pub fn value_iteration(
    g: &PrefractalGraph,
    f: &ScalarField,
    gb: &BoundaryData,
    tol: f64,
    max_iter: usize,
) -> Result<ValueIteration> {
    let prep = Prepared::new(g, f, gb)?;
    let h = g.h();
    let mut gval = vec![f64::INFINITY; g.vertex_count()];
    for &(v, val) in &prep.bd {
        gval[v] = val;
    }
    let mut u = barrier(g, &prep)?;
    for &(v, val) in &prep.bd {
        u[v] = val;
    }
    let mut residuals = Vec::new();
    loop {
        let next = par::map_range(g.vertex_count(), |x| {
            let through = g
                .neighbors(x)
                .iter()
                .map(|nb| u[nb.vertex])
                .fold(f64::INFINITY, f64::min)
                + h * prep.fv[x];
            through.min(gval[x])
        });
        let change = crate::solution::sup_diff(&next, &u);
        u = next;
        residuals.push(change);
        if change <= tol {
            break;
        }
        if residuals.len() >= max_iter {
            return Err(Error::NoConvergence {
                iterations: residuals.len(),
                residual: change,
            });
        }
    }
    Ok(ValueIteration {
        solution: node_solution(g, u, prep.bd, SolverKind::ValueIteration),
        sweeps: residuals.len(),
        residuals,
    })
}

/// Minimal path cost by exhaustive depth-first enumeration of simple paths
/// from every vertex. Since `f > 0`, revisiting a vertex only adds cost, so
/// simple paths suffice; partial paths already costlier than the best
/// complete one found are cut.
pub fn brute_force_solution(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData) -> Result<NodeSolution> {
    if g.vertex_count() > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::EnumerationBudget(format!(
            "{} vertices, at most {BRUTE_FORCE_MAX_VERTICES} are enumerated",
            g.vertex_count()
        )));
    }
    let prep = Prepared::new(g, f, gb)?;
    let mut gval = vec![None; g.vertex_count()];
    for &(v, val) in &prep.bd {
        gval[v] = Some(val);
    }
    let g_min = prep.bd.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let values = par::try_map_range(g.vertex_count(), |start| {
        let mut search = PathSearch {
            g,
            step: prep.fv.iter().map(|f| g.h() * f).collect(),
            gval: &gval,
            g_min,
            visited: vec![false; g.vertex_count()],
            best: f64::INFINITY,
            expansions: 0,
        };
        search.visit(start, 0.0)?;
        Ok::<_, Error>(search.best)
    })?;
    ensure_reached(&values)?;
    Ok(node_solution(g, values, prep.bd, SolverKind::BruteForce))
}

struct PathSearch<'a> {
    g: &'a PrefractalGraph,
    step: Vec<f64>,
    gval: &'a [Option<f64>],
    g_min: f64,
    visited: Vec<bool>,
    best: f64,
    expansions: u64,
}

impl PathSearch<'_> {
    /// `cost` is the price of the path before `v`.
    fn visit(&mut self, v: usize, cost: f64) -> Result<()> {
        self.expansions += 1;
        if self.expansions > BRUTE_FORCE_EXPANSIONS {
            return Err(Error::EnumerationBudget(format!("more than {BRUTE_FORCE_EXPANSIONS} path expansions")));
        }
        if let Some(gv) = self.gval[v] {
            self.best = self.best.min(cost + gv);
        }
        let next = cost + self.step[v];
        if next + self.g_min >= self.best {
            return Ok(());
        }
        self.visited[v] = true;
        for nb in self.g.neighbors(v) {
            if !self.visited[nb.vertex] {
                self.visit(nb.vertex, next)?;
            }
        }
        self.visited[v] = false;
        Ok(())
    }
}

fn interior_check(
    g: &PrefractalGraph,
    f: &ScalarField,
    gb: &BoundaryData,
    u: &[f64],
    tol: f64,
    name: &str,
    violation: impl Fn(f64, f64) -> f64,
) -> Result<VerifierReport> {
    check_len(g, u)?;
    let prep = Prepared::new(g, f, gb)?;
    let mut report = VerifierReport::new(name, tol);
    for x in 0..g.vertex_count() {
        if prep.is_boundary[x] {
            continue;
        }
        let v = violation(grad_norm(g, u, x), prep.fv[x]);
        report.observe(v, || Witness::Vertex(g.key(x).clone()));
    }
    if report.witness.is_none() {
        return Ok(VerifierReport::vacuous(name, tol));
    }
    Ok(report)
}

fn check_len(g: &PrefractalGraph, u: &[f64]) -> Result<()> {
    if u.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "vertex function has {} values, graph has {} vertices",
            u.len(),
            g.vertex_count()
        )));
    }
    Ok(())
}

/// Worst excess of `|Du|_n - f` over interior vertices.
pub fn check_subsolution(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, u: &[f64], tol: f64) -> Result<VerifierReport> {
    interior_check(g, f, gb, u, tol, "subsolution", |grad, fx| grad - fx)
}

/// Worst excess of `f - |Du|_n` over interior vertices.
pub fn check_supersolution(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, u: &[f64], tol: f64) -> Result<VerifierReport> {
    interior_check(g, f, gb, u, tol, "supersolution", |grad, fx| fx - grad)
}

/// For every ordered pair of boundary vertices, `g(x) - (cost_n(x → y) + g(y))`
/// where `cost_n` is the cheapest vertex-path cost under the same convention.
pub fn check_compat_discrete(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData) -> Result<VerifierReport> {
    let prep = Prepared::new(g, f, gb)?;
    Ok(compat_report(g, &prep))
}

fn compat_report(g: &PrefractalGraph, prep: &Prepared) -> VerifierReport {
    let h = g.h();
    pairwise_compat(g, &prep.bd, "compat_discrete", |src| forward_costs(g, src, |v, _| h * prep.fv[v]))
}

pub(crate) fn pairwise_compat<F>(g: &PrefractalGraph, bd: &ResolvedBoundary, name: &str, costs_from: F) -> VerifierReport
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    let rows = par::map_slice(bd, |&(x, _)| costs_from(x));
    let mut report = VerifierReport::new(name, TOL);
    for (i, &(x, gx)) in bd.iter().enumerate() {
        for &(y, gy) in bd {
            if x == y {
                continue;
            }
            report.observe(gx - (rows[i][y] + gy), || Witness::Pair(g.key(x).clone(), g.key(y).clone()));
        }
    }
    if report.witness.is_none() {
        return VerifierReport::vacuous(name, TOL);
    }
    report
}

/// Bound `|u(x)| ≤ max|g| + d_n(x) max f` at every vertex.
pub fn check_barrier(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, u: &[f64], tol: f64) -> Result<VerifierReport> {
    check_len(g, u)?;
    let prep = Prepared::new(g, f, gb)?;
    let bound = barrier(g, &prep)?;
    let mut report = VerifierReport::new("barrier_bound", tol);
    for x in 0..g.vertex_count() {
        report.observe(u[x].abs() - bound[x], || Witness::Vertex(g.key(x).clone()));
    }
    Ok(report)
}

/// Bound `|u(y) - u(x)| ≤ h_n max f` across every edge.
pub fn check_adjacency(g: &PrefractalGraph, f: &ScalarField, u: &[f64], tol: f64) -> Result<VerifierReport> {
    check_len(g, u)?;
    let fmax = f.positive_at_vertices(g)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut report = VerifierReport::new("adjacency_bound", tol);
    for e in g.edges() {
        report.observe((u[e.head] - u[e.tail]).abs() - g.h() * fmax, || {
            Witness::OnEdge(g.key(e.tail).clone(), g.key(e.head).clone())
        });
    }
    Ok(report)
}

/// `f_n = (e^{h f} - 1) / h`.
pub fn kruzkov_rhs(f: f64, h: f64) -> f64 {
    (h * f).exp_m1() / h
}

/// `f_n` at every vertex of `g`.
pub fn kruzkov_f(g: &PrefractalGraph, f: &ScalarField) -> Result<Vec<f64>> {
    Ok(f.positive_at_vertices(g)?.into_iter().map(|fx| kruzkov_rhs(fx, g.h())).collect())
}

/// `w = 1 - e^{-u}`.
pub fn kruzkov_forward(u: &NodeSolution) -> NodeSolution {
    NodeSolution {
        values: u.values.iter().map(|&x| -(-x).exp_m1()).collect(),
        boundary: u.boundary.iter().map(|&(v, gv)| (v, -(-gv).exp_m1())).collect(),
        solver: SolverKind::Derived,
        compat: None,
        warnings: Vec::new(),
        ..u.clone()
    }
}

/// Residual of `|Dw|_n + f_n w = f_n` for `w = 1 - e^{-u}` at interior vertices.
pub fn check_kruzkov_residual(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, u: &[f64], tol: f64) -> Result<VerifierReport> {
    check_len(g, u)?;
    let prep = Prepared::new(g, f, gb)?;
    let w: Vec<f64> = u.iter().map(|&x| -(-x).exp_m1()).collect();
    let mut report = VerifierReport::new("kruzkov_residual", tol);
    for x in 0..g.vertex_count() {
        if prep.is_boundary[x] {
            continue;
        }
        let fnx = kruzkov_rhs(prep.fv[x], g.h());
        let residual = grad_norm(g, &w, x) + fnx * w[x] - fnx;
        report.observe(residual.abs(), || Witness::Vertex(g.key(x).clone()));
    }
    if report.witness.is_none() {
        return Ok(VerifierReport::vacuous("kruzkov_residual", tol));
    }
    Ok(report)
}

/// `max |f_n - f| ≤ h_n max f` over the vertices, checked without tolerance.
///
/// This holds when `h_n max f` is small and `max f` is at most about 1.5; for
/// larger `f` the gap `f_n - f ≈ h f² / 2` exceeds it and the check fails.
pub fn check_kruzkov_bound(g: &PrefractalGraph, f: &ScalarField) -> Result<VerifierReport> {
    let fv = f.positive_at_vertices(g)?;
    let h = g.h();
    let fmax = fv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut report = VerifierReport::new("kruzkov_rhs_bound", 0.0);
    for (x, &fx) in fv.iter().enumerate() {
        report.observe((kruzkov_rhs(fx, h) - fx).abs() - h * fmax, || Witness::Vertex(g.key(x).clone()));
    }
    Ok(report)
}

/// Tolerance of the exponential-transform residual in [`discrete_battery`].
pub const KRUZKOV_TOL: f64 = 1e-10;

/// Every graph-equation verifier on a vertex function: sub- and
/// supersolution, exponential-transform residual, the two a priori bounds
/// and boundary compatibility.
pub fn discrete_battery(g: &PrefractalGraph, f: &ScalarField, gb: &BoundaryData, u: &[f64], tol: f64) -> Result<Vec<VerifierReport>> {
    Ok(vec![
        check_subsolution(g, f, gb, u, tol)?,
        check_supersolution(g, f, gb, u, tol)?,
        check_kruzkov_residual(g, f, gb, u, KRUZKOV_TOL.max(tol))?,
        check_barrier(g, f, gb, u, tol)?,
        check_adjacency(g, f, u, tol)?,
        check_compat_discrete(g, f, gb)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::{build_prefractal, VertexKey};
    use crate::metric::boundary_distance;

    fn field(t: &str) -> ScalarField {
        ScalarField::parse(t).unwrap()
    }

    fn zero() -> BoundaryData {
        BoundaryData::zero(2)
    }

    #[test]
    fn gradient_norm_examples() {
        let g = build_prefractal(2, 1).unwrap();
        let u = vec![3.0; 6];
        for x in 0..6 {
            assert_eq!(discrete_gradient_norm(&g, &u, x).unwrap(), 0.0);
        }
        let d = boundary_distance(&g).values;
        let mid = (0..6).find(|&v| !g.is_corner(v)).unwrap();
        assert_eq!(discrete_gradient_norm(&g, &d, mid).unwrap(), 1.0);
        assert!(discrete_gradient_norm(&g, &d, 6).is_err());

        let g4 = build_prefractal(2, 4).unwrap();
        let d4 = boundary_distance(&g4).values;
        for x in 0..g4.vertex_count() {
            if !g4.is_corner(x) {
                assert_eq!(discrete_gradient_norm(&g4, &d4, x).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn level_one_distance() {
        let g = build_prefractal(2, 1).unwrap();
        let u = solve_discrete(&g, &field("1"), &zero()).unwrap();
        for v in 0..6 {
            let want = if g.is_corner(v) { 0.0 } else { 0.5 };
            assert_eq!(u.values[v], want);
        }
        assert_eq!(u.solver, SolverKind::Dijkstra);
        assert_eq!(u.convention, PathCostConvention::ExcludeTerminal);
        assert!(u.compat.as_ref().unwrap().passed);
        assert!(u.warnings.is_empty());
    }

    #[test]
    fn level_two_distance_values() {
        let g = build_prefractal(2, 2).unwrap();
        let u = solve_discrete(&g, &field("1"), &zero()).unwrap();
        for &v in &u.values {
            assert!([0.0, 0.25, 0.5].contains(&v));
        }
        assert_eq!(u.values.iter().filter(|&&v| v == 0.5).count(), 6);
        for b in [(1, 1), (2, 1), (1, 2)] {
            let k = VertexKey::new(2, vec![b.0, b.1]).unwrap();
            assert_eq!(u.get(&g, &k), Some(0.5));
        }
    }

    #[test]
    fn single_corner_boundary_gives_vertex_distance() {
        let g = build_prefractal(2, 3).unwrap();
        let gb = BoundaryData::new(vec![(VertexKey::corner(2, 0), 0.0)]).unwrap();
        let u = solve_discrete(&g, &field("1"), &gb).unwrap();
        let hops = crate::metric::hop_distances(&g, &[g.corner_id(0)]);
        for v in 0..g.vertex_count() {
            assert_eq!(u.values[v], hops[v] as f64 * g.h());
        }
    }

    #[test]
    fn fixed_point_identity() {
        let g = build_prefractal(2, 4).unwrap();
        let f = field("1 + 0.5*sin(3*x) * y");
        let gb = BoundaryData::corners(2, &[0.1, 0.3, 0.2]).unwrap();
        let u = solve_discrete(&g, &f, &gb).unwrap();
        let fv = f.at_vertices(&g).unwrap();
        for x in 0..g.vertex_count() {
            if g.is_corner(x) {
                continue;
            }
            let best = g.neighbors(x).iter().map(|nb| u.values[nb.vertex]).fold(f64::INFINITY, f64::min);
            assert!((u.values[x] - best - g.h() * fv[x]).abs() <= TOL);
        }
        assert_eq!(u.values[g.corner_id(1)], 0.3);
    }

    #[test]
    fn value_iteration_matches_sweep() {
        let g = build_prefractal(2, 1).unwrap();
        let vi = value_iteration(&g, &field("1"), &zero(), 1e-12, 100).unwrap();
        assert!(vi.sweeps <= 2);
        assert_eq!(vi.solution.values, solve_discrete(&g, &field("1"), &zero()).unwrap().values);

        let g3 = build_prefractal(2, 3).unwrap();
        let f = field("1+x");
        let vi = value_iteration(&g3, &f, &zero(), 1e-13, 10_000).unwrap();
        let dj = solve_discrete(&g3, &f, &zero()).unwrap();
        assert!(vi.solution.max_abs_diff(&dj.values) <= 1e-10);
        for w in vi.residuals.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "residuals {:?}", vi.residuals);
        }
    }

    #[test]
    fn value_iteration_reports_non_convergence() {
        let g = build_prefractal(2, 4).unwrap();
        let err = value_iteration(&g, &field("1+x"), &zero(), 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 2, .. }));
    }

    #[test]
    fn brute_force_agrees() {
        let f = field("1 + 0.3*cos(5*x*y) + 0.2*x");
        let gb = BoundaryData::corners(2, &[0.0, 0.2, 0.1]).unwrap();
        for n in 0..=3 {
            let g = build_prefractal(2, n).unwrap();
            let bf = brute_force_solution(&g, &f, &gb).unwrap();
            let dj = solve_discrete(&g, &f, &gb).unwrap();
            assert!(bf.max_abs_diff(&dj.values) <= 1e-12, "level {n}");
        }
        let g0 = build_prefractal(2, 0).unwrap();
        let bf = brute_force_solution(&g0, &f, &gb).unwrap();
        assert_eq!(bf.values, vec![0.0, 0.1, 0.2]);
        let g4 = build_prefractal(2, 4).unwrap();
        assert!(matches!(brute_force_solution(&g4, &f, &gb), Err(Error::EnumerationBudget(_))));
    }

    #[test]
    fn verifiers_on_solution_and_zero() {
        let g = build_prefractal(2, 3).unwrap();
        let f = field("1");
        let u = solve_discrete(&g, &f, &zero()).unwrap();
        assert!(check_subsolution(&g, &f, &zero(), &u.values, TOL).unwrap().passed);
        assert!(check_supersolution(&g, &f, &zero(), &u.values, TOL).unwrap().passed);

        let z = vec![0.0; g.vertex_count()];
        assert!(check_subsolution(&g, &f, &zero(), &z, TOL).unwrap().passed);
        let sup = check_supersolution(&g, &f, &zero(), &z, TOL).unwrap();
        assert!(!sup.passed);
        assert_eq!(sup.worst_violation, 1.0);

        let up = upper_barrier(&g, &field("1+x"), &zero()).unwrap();
        assert!(check_supersolution(&g, &field("1+x"), &zero(), &up, TOL).unwrap().passed);
        assert!(check_len(&g, &[0.0]).is_err());
    }

    #[test]
    fn compatibility_examples() {
        let g = build_prefractal(2, 3).unwrap();
        let f = field("1");
        assert!(check_compat_discrete(&g, &f, &BoundaryData::corners(2, &[4.0, 4.0, 4.0]).unwrap()).unwrap().passed);
        assert!(check_compat_discrete(&g, &f, &BoundaryData::corners(2, &[0.0, 0.5, 0.25]).unwrap()).unwrap().passed);

        let bad = BoundaryData::corners(2, &[0.0, 2.0, 0.0]).unwrap();
        let r = check_compat_discrete(&g, &f, &bad).unwrap();
        assert!(!r.passed);
        assert!((r.worst_violation - 1.0).abs() < 1e-15);
        assert_eq!(
            r.witness,
            Some(Witness::Pair(VertexKey::corner(2, 1), VertexKey::corner(2, 0)))
        );

        // non-strict solves anyway; the boundary value drops below g at a2
        let u = solve_discrete(&g, &f, &bad).unwrap();
        assert_eq!(u.warnings.len(), 1);
        assert!(u.values[g.corner_id(1)] < 2.0);
        assert_eq!(u.values[g.corner_id(1)], 1.0);
        let strict = solve_discrete_with(&g, &f, &bad, SolveOptions { strict: true });
        assert!(matches!(strict, Err(Error::Incompatible { .. })));
    }

    #[test]
    fn kruzkov_examples() {
        let fn_quarter = kruzkov_rhs(1.0, 0.25);
        assert!((fn_quarter - 4.0 * (0.25f64.exp() - 1.0)).abs() < 1e-15);
        assert!((fn_quarter - 1.136_101_666_750_2).abs() < 1e-12);
        assert!((fn_quarter - 1.0).abs() <= 0.25);

        let g = build_prefractal(2, 2).unwrap();
        let f = field("1");
        let u = solve_discrete(&g, &f, &zero()).unwrap();
        let r = check_kruzkov_residual(&g, &f, &zero(), &u.values, 1e-10).unwrap();
        assert!(r.passed, "{r}");
        assert!(check_kruzkov_bound(&g, &f).unwrap().passed);

        let w = kruzkov_forward(&u);
        assert!(w.values.iter().zip(&u.values).all(|(w, u)| (*w - (1.0 - (-u).exp())).abs() < 1e-15));
        let z = NodeSolution {
            values: vec![0.0; g.vertex_count()],
            ..u.clone()
        };
        assert!(kruzkov_forward(&z).values.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn kruzkov_bound_needs_small_f() {
        let g = build_prefractal(2, 2).unwrap();
        assert!(!check_kruzkov_bound(&g, &field("10")).unwrap().passed);
    }

    #[test]
    fn regularity_bounds() {
        let g = build_prefractal(2, 4).unwrap();
        let f = field("1 + x*y");
        let gb = BoundaryData::corners(2, &[0.2, -0.1, 0.0]).unwrap();
        let u = solve_discrete(&g, &f, &gb).unwrap();
        assert!(check_barrier(&g, &f, &gb, &u.values, TOL).unwrap().passed);
        assert!(check_adjacency(&g, &f, &u.values, TOL).unwrap().passed);
    }

    #[test]
    fn battery_on_own_output() {
        let g = build_prefractal(2, 4).unwrap();
        let f = field("1 + y");
        let gb = BoundaryData::corners(2, &[0.0, 0.3, 0.1]).unwrap();
        let u = solve_discrete(&g, &f, &gb).unwrap();
        let reports = discrete_battery(&g, &f, &gb, &u.values, 1e-12).unwrap();
        assert_eq!(reports.len(), 6);
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
        let mut bumped = u.values.clone();
        bumped[7] += 0.01;
        assert!(discrete_battery(&g, &f, &gb, &bumped, 1e-12).unwrap().iter().any(|r| !r.passed));
    }

    #[test]
    fn rejects_non_positive_f() {
        let g = build_prefractal(2, 2).unwrap();
        assert!(matches!(solve_discrete(&g, &field("x - 0.5"), &zero()), Err(Error::NonPositive { .. })));
    }
}
