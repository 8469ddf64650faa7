use std::fmt;

use serde::Serialize;

use crate::boundary::ResolvedBoundary;
use crate::gasket::{PrefractalGraph, VertexKey};

/// Which solver produced a [`NodeSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dijkstra,
    ValueIteration,
    BruteForce,
    /// Label-setting sweep with integrated edge costs on the metric network.
    Network,
    /// Not a solver output: a transformed or user-supplied field.
    Derived,
}

impl SolverKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Dijkstra => "dijkstra",
            Self::ValueIteration => "value_iteration",
            Self::BruteForce => "brute_force",
            Self::Network => "network",
            Self::Derived => "derived",
        }
    }
}

/// How a vertex path `x_0, …, x_N` is priced in the graph problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathCostConvention {
    /// `Σ_{k<N} h f(x_k) + g(x_N)`: the terminal boundary vertex is free, so the
    /// trivial path at a boundary vertex costs exactly `g`.
    #[serde(rename = "sum_to_n_minus_1")]
    ExcludeTerminal,
    /// `∫ f ds + g(y)` along network paths.
    #[serde(rename = "edge_integral")]
    EdgeIntegral,
}

impl PathCostConvention {
    pub fn tag(self) -> &'static str {
        match self {
            Self::ExcludeTerminal => "sum_to_n_minus_1",
            Self::EdgeIntegral => "edge_integral",
        }
    }
}

/// Vertex values of a solved instance, indexed by vertex id of the graph it
/// was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolution {
    pub dim: usize,
    pub level: u32,
    pub values: Vec<f64>,
    pub boundary: ResolvedBoundary,
    pub convention: PathCostConvention,
    pub solver: SolverKind,
    pub compat: Option<VerifierReport>,
    pub warnings: Vec<String>,
}

impl NodeSolution {
    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Value at a vertex given by key, looked up in the graph the solution lives on.
    pub fn get(&self, g: &PrefractalGraph, key: &VertexKey) -> Option<f64> {
        g.id_of(key).map(|v| self.values[v])
    }

    pub fn boundary_ids(&self) -> Vec<usize> {
        self.boundary.iter().map(|&(v, _)| v).collect()
    }

    /// Values at the vertices of `coarse`, read from this solution on `fine`.
    pub fn restrict(&self, fine: &PrefractalGraph, coarse: &PrefractalGraph) -> Vec<f64> {
        assert_eq!(fine.level(), self.level, "solution does not live on the given graph");
        coarse
            .keys()
            .iter()
            .map(|k| self.values[fine.id_of(k).expect("coarse vertex present in the fine graph")])
            .collect()
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        sup_diff(&self.values, other)
    }
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Where a verifier saw its worst case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Vertex(VertexKey),
    /// Ordered pair, e.g. `(x, y)` with `g(x) > cost(x → y) + g(y)`.
    Pair(VertexKey, VertexKey),
    /// A point on an edge given by its endpoints.
    OnEdge(VertexKey, VertexKey),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vertex(k) => write!(f, "{k}"),
            Self::Pair(a, b) => write!(f, "({a}) -> ({b})"),
            Self::OnEdge(a, b) => write!(f, "edge ({a})-({b})"),
        }
    }
}

impl Serialize for Witness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Outcome of a pointwise inequality check: `worst_violation` is the largest
/// signed excess (negative means slack everywhere).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierReport {
    pub check: String,
    pub worst_violation: f64,
    pub witness: Option<Witness>,
    pub tolerance: f64,
    pub passed: bool,
}

impl VerifierReport {
    pub fn new(check: &str, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            worst_violation: f64::NEG_INFINITY,
            witness: None,
            tolerance,
            passed: true,
        }
    }

    /// Record one observation; ties keep the first witness.
    pub fn observe(&mut self, violation: f64, witness: impl FnOnce() -> Witness) {
        if violation > self.worst_violation || self.witness.is_none() {
            self.worst_violation = violation;
            self.witness = Some(witness());
        }
        self.passed = self.worst_violation <= self.tolerance;
    }

    /// A check with nothing to examine.
    pub fn vacuous(check: &str, tolerance: f64) -> Self {
        Self {
            worst_violation: 0.0,
            ..Self::new(check, tolerance)
        }
    }
}

impl fmt::Display for VerifierReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {} worst {:+.3e} (tol {:.0e})",
            self.check,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst_violation,
            self.tolerance
        )?;
        if let Some(w) = &self.witness {
            write!(f, " at {w}")?;
        }
        Ok(())
    }
}
