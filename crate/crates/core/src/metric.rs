//! Distances on the prefractal: the vertex distance `d_n`, boundary distances,
//! and fine-level estimates of the geodesic distance on the gasket.
//!
//! All level-`n` edges have length `2^-n`, so every distance here is a hop
//! count from a breadth-first search scaled by `h_n`. Hop counts are exact
//! integers and the scaling is by a power of two, so vertex distances carry
//! no rounding error at all.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gasket::{PrefractalGraph, VertexKey};
use crate::solution::{NodeSolution, PathCostConvention, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    ExactAtVertices,
    /// A path length, hence an upper bound, within `error_bound` of the true distance.
    UpperEstimate { error_bound: f64 },
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExactAtVertices => f.write_str("exact-at-vertices"),
            Self::UpperEstimate { error_bound } => write!(f, "upper-estimate(+-{error_bound:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceResult {
    pub value: f64,
    pub level_used: u32,
    pub exactness: Exactness,
}

/// Hop counts from the nearest source; `u64::MAX` where unreachable.
pub fn hop_distances(g: &PrefractalGraph, sources: &[usize]) -> Vec<u64> {
    let mut hops = vec![u64::MAX; g.vertex_count()];
    let mut queue = VecDeque::with_capacity(g.vertex_count());
    for &s in sources {
        if hops[s] != 0 {
            hops[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let next = hops[v] + 1;
        for nb in g.neighbors(v) {
            if hops[nb.vertex] == u64::MAX {
                hops[nb.vertex] = next;
                queue.push_back(nb.vertex);
            }
        }
    }
    hops
}

/// Hop counts truncated at `radius`: vertices farther away are omitted.
pub(crate) fn hops_within(g: &PrefractalGraph, source: usize, radius: u64) -> Vec<(usize, u64)> {
    let mut seen = std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(source, 0u64);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = seen[&v];
        if d == radius {
            continue;
        }
        for nb in g.neighbors(v) {
            if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(nb.vertex) {
                slot.insert(d + 1);
                queue.push_back(nb.vertex);
            }
        }
    }
    seen.into_iter().collect()
}

/// Distances (in length units) from the nearest vertex of `set`.
pub fn distance_to_set(g: &PrefractalGraph, set: &[usize]) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    hop_distances(g, set)
        .into_iter()
        .enumerate()
        .map(|(v, hops)| {
            if hops == u64::MAX {
                Err(Error::Unreachable(v))
            } else {
                Ok(hops as f64 * g.h())
            }
        })
        .collect()
}

/// `d_n(x, y)`.
pub fn vertex_distance(g: &PrefractalGraph, x: usize, y: usize) -> Result<DistanceResult> {
    let n = g.vertex_count();
    if x >= n || y >= n {
        return Err(Error::UnknownVertex(format!("id {} out of range", x.max(y))));
    }
    let hops = hop_distances(g, &[x])[y];
    if hops == u64::MAX {
        return Err(Error::Unreachable(y));
    }
    Ok(DistanceResult {
        value: hops as f64 * g.h(),
        level_used: g.level(),
        exactness: Exactness::ExactAtVertices,
    })
}

/// `d_n(x) = min_{y ∈ Γ} d_n(x, y)` at every vertex.
pub fn boundary_distance(g: &PrefractalGraph) -> NodeSolution {
    let values = distance_to_set(g, g.boundary()).expect("the gasket graph is connected");
    NodeSolution {
        dim: g.dim(),
        level: g.level(),
        values,
        boundary: g.boundary().iter().map(|&v| (v, 0.0)).collect(),
        convention: PathCostConvention::ExcludeTerminal,
        solver: SolverKind::Derived,
        compat: None,
        warnings: Vec::new(),
    }
}

/// A point of the gasket that some prefractal network contains.
#[derive(Debug, Clone, PartialEq)]
pub enum PointOnS {
    Vertex(VertexKey),
    /// The point at arclength `s` along the edge, measured from `tail`.
    /// The edge belongs to the graph of the level where both keys are
    /// adjacent; `s` ranges over `[0, 2^-level]`.
    OnEdge { tail: VertexKey, head: VertexKey, s: f64 },
}

impl PointOnS {
    /// Point on edge `e` of `g` at arclength `s` from the edge's tail.
    pub fn on_edge_of(g: &PrefractalGraph, e: usize, s: f64) -> Self {
        let edge = g.edge(e);
        Self::OnEdge {
            tail: g.key(edge.tail).clone(),
            head: g.key(edge.head).clone(),
            s,
        }
    }
}

/// Key-space level at which `a` and `b` are one lattice step apart.
fn edge_level(a: &VertexKey, b: &VertexKey) -> Result<u32> {
    let k = a.level().max(b.level());
    let (pa, pb) = (a.scaled_to(k), b.scaled_to(k));
    let diff: Vec<i128> = pa.iter().zip(&pb).map(|(x, y)| *y as i128 - *x as i128).collect();
    let plus = diff.iter().filter(|&&d| d == 1).count();
    let minus = diff.iter().filter(|&&d| d == -1).count();
    let zero = diff.iter().filter(|&&d| d == 0).count();
    let unit = zero + plus + minus == diff.len() && plus <= 1 && minus <= 1 && plus + minus >= 1;
    if !unit {
        return Err(Error::InvalidArgument(format!("{a} and {b} do not span a prefractal edge")));
    }
    Ok(k)
}

/// A point expressed through vertices of one graph: `(vertex, offset)` anchors
/// with the arclength from the anchor to the point, and the containing edge.
struct Located {
    anchors: Vec<(usize, f64)>,
    edge: Option<(usize, usize, f64)>,
}

fn locate(g: &PrefractalGraph, p: &PointOnS) -> Result<Located> {
    let m = g.level();
    let mismatch = |what: String| Error::InvalidArgument(format!("level mismatch: {what} is not resolved at level {m}"));
    match p {
        PointOnS::Vertex(k) => {
            let v = g.id_of(k).ok_or_else(|| mismatch(format!("vertex {k}")))?;
            Ok(Located {
                anchors: vec![(v, 0.0)],
                edge: None,
            })
        }
        PointOnS::OnEdge { tail, head, s } => {
            let k = edge_level(tail, head)?;
            if k > m {
                return Err(mismatch(format!("edge ({tail})-({head})")));
            }
            let hk = 1.0 / (1u64 << k) as f64;
            if !(0.0..=hk).contains(s) {
                return Err(Error::InvalidArgument(format!("arclength {s} outside [0, {hk}]")));
            }
            let parts = 1u64 << (m - k);
            let (a, b) = (tail.scaled_to(m), head.scaled_to(m));
            let along = |j: u64| -> Result<usize> {
                // a + j (b - a) / parts, exact because b - a is a unit step at level k
                let bary: Vec<u64> = a
                    .iter()
                    .zip(&b)
                    .map(|(&x, &y)| ((x as i128) + (j as i128) * ((y as i128 - x as i128) / parts as i128)) as u64)
                    .collect();
                let key = VertexKey::new(m, bary)?;
                g.id_of(&key).ok_or_else(|| mismatch(format!("vertex {key}")))
            };
            let h = g.h();
            let j = ((s / h).floor() as u64).min(parts - 1);
            let (va, vb) = (along(j)?, along(j + 1)?);
            if g.edge_between(va, vb).is_none() {
                return Err(Error::InvalidArgument(format!("({tail})-({head}) is not a prefractal edge")));
            }
            let sa = s - j as f64 * h;
            Ok(Located {
                anchors: vec![(va, sa), (vb, h - sa)],
                edge: Some((va, vb, sa)),
            })
        }
    }
}

/// Estimate of the geodesic distance `d(x, y)` on the gasket from the level
/// of `g`: exact for vertices, otherwise the length of the best path through
/// the endpoints of the containing level-`m` edges (error at most `2 h_m`).
pub fn geodesic_estimate(g: &PrefractalGraph, x: &PointOnS, y: &PointOnS) -> Result<DistanceResult> {
    let lx = locate(g, x)?;
    let ly = locate(g, y)?;
    let mut best = f64::INFINITY;
    if let (Some((a1, b1, s1)), Some((a2, b2, s2))) = (lx.edge, ly.edge) {
        if (a1, b1) == (a2, b2) {
            best = (s1 - s2).abs();
        }
    }
    for &(a, off_a) in &lx.anchors {
        let hops = hop_distances(g, &[a]);
        for &(b, off_b) in &ly.anchors {
            best = best.min(hops[b] as f64 * g.h() + off_a + off_b);
        }
    }
    let exactness = if lx.edge.is_none() && ly.edge.is_none() {
        Exactness::ExactAtVertices
    } else {
        Exactness::UpperEstimate { error_bound: 2.0 * g.h() }
    };
    Ok(DistanceResult {
        value: best,
        level_used: g.level(),
        exactness,
    })
}

/// Network boundary distance `δ_n(p, Γ)` at a point of `S^n`, from the
/// vertex boundary distances `dist` of `g`.
pub fn boundary_distance_at(g: &PrefractalGraph, dist: &[f64], p: &PointOnS) -> Result<f64> {
    let located = locate(g, p)?;
    Ok(located
        .anchors
        .iter()
        .map(|&(v, off)| dist[v] + off)
        .fold(f64::INFINITY, f64::min))
}

/// Endpoint syntax of the `distance` subcommand: a corner name `a1`…, a vertex
/// key `n:p,q`, or `edge:k:s` (edge id `k` of the query graph at arclength `s`).
#[derive(Debug, Clone, PartialEq)]
pub enum PointSpec {
    Corner(usize),
    Key(VertexKey),
    Edge(usize, f64),
}

impl FromStr for PointSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("edge:") {
            let (e, arc) = rest
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("malformed edge point `{s}` (expected edge:k:s)")))?;
            let e = e.parse().map_err(|_| Error::InvalidArgument(format!("bad edge id in `{s}`")))?;
            let arc = arc.parse().map_err(|_| Error::InvalidArgument(format!("bad arclength in `{s}`")))?;
            return Ok(Self::Edge(e, arc));
        }
        if let Some(i) = s.strip_prefix('a').and_then(|i| i.parse::<usize>().ok()) {
            if i == 0 {
                return Err(Error::InvalidArgument("corners are numbered from a1".into()));
            }
            return Ok(Self::Corner(i - 1));
        }
        Ok(Self::Key(s.parse()?))
    }
}

impl PointSpec {
    pub fn resolve(&self, g: &PrefractalGraph) -> Result<PointOnS> {
        match self {
            Self::Corner(i) if *i <= g.dim() => Ok(PointOnS::Vertex(VertexKey::corner(g.dim(), *i))),
            Self::Corner(i) => Err(Error::InvalidArgument(format!("corner a{} does not exist for D = {}", i + 1, g.dim()))),
            Self::Key(k) => Ok(PointOnS::Vertex(k.clone())),
            Self::Edge(e, s) if *e < g.edge_count() => Ok(PointOnS::on_edge_of(g, *e, *s)),
            Self::Edge(e, _) => Err(Error::InvalidArgument(format!("edge {e} out of range"))),
        }
    }
}
