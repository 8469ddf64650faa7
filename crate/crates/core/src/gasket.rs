//! Prefractal graphs of the Sierpinski gasket over a `D`-simplex.
//!
//! Vertices are addressed by exact integer barycentric keys: a vertex of the
//! level-`n` graph is `a_1 + Σ (p_i / 2^n)(a_{i+1} - a_1)` with nonnegative
//! integers `p_i` summing to at most `2^n`. Keys are stored at their minimal
//! level (numerators not all even), so the same point created at a coarse
//! level and seen again at a fine level has one identity. Floating-point
//! coordinates are derived from keys and never used for identification.
//!
//! Vertices are ordered lexicographically on `(level, numerators)` of their
//! canonical key, which puts every coarser vertex set `V^m` (m < n) in front
//! of `V^n` as a prefix. Edges are oriented from the smaller to the larger
//! endpoint and sorted lexicographically.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable overriding [`DEFAULT_CELL_BUDGET`].
pub const CELL_BUDGET_ENV: &str = "GASKET_CELL_BUDGET";

/// Default maximum number of `(D+1)^n` cells a build may create (`3^13`).
pub const DEFAULT_CELL_BUDGET: u64 = 1_594_323;

/// Cell budget in effect: the environment override if it parses, the default otherwise.
pub fn cell_budget() -> u64 {
    std::env::var(CELL_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CELL_BUDGET)
}

/// Canonical barycentric address of a prefractal vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexKey {
    level: u32,
    bary: Vec<u64>,
}

impl VertexKey {
    /// Key for numerators `bary` over `2^level`, reduced to canonical form.
    pub fn new(level: u32, bary: Vec<u64>) -> Result<Self> {
        if bary.is_empty() {
            return Err(Error::InvalidArgument("vertex key needs at least one coordinate".into()));
        }
        if level > 62 {
            return Err(Error::InvalidArgument(format!("key level {level} is too deep")));
        }
        let total: u128 = bary.iter().map(|&p| p as u128).sum();
        if total > 1u128 << level {
            return Err(Error::InvalidArgument(format!(
                "key numerators sum to {total}, exceeding 2^{level}"
            )));
        }
        Ok(Self { level, bary }.canonicalize())
    }

    /// The corner `a_{i+1}` of the `dim`-simplex (`i` is zero-based).
    pub fn corner(dim: usize, i: usize) -> Self {
        assert!(i <= dim, "corner index {i} out of range for dimension {dim}");
        let mut bary = vec![0; dim];
        if i > 0 {
            bary[i - 1] = 1;
        }
        Self { level: 0, bary }
    }

    /// Halve the numerators while they are all even and the level is positive.
    pub fn canonicalize(mut self) -> Self {
        while self.level > 0 && self.bary.iter().all(|p| p % 2 == 0) {
            self.bary.iter_mut().for_each(|p| *p /= 2);
            self.level -= 1;
        }
        self
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn bary(&self) -> &[u64] {
        &self.bary
    }

    pub fn dim(&self) -> usize {
        self.bary.len()
    }

    /// Numerators over `2^m`, for `m >= self.level()`.
    pub fn scaled_to(&self, m: u32) -> Vec<u64> {
        assert!(m >= self.level, "cannot express a level-{} key at level {m}", self.level);
        let shift = m - self.level;
        self.bary.iter().map(|&p| p << shift).collect()
    }

    /// Index of the simplex corner this key denotes, if it is one.
    pub fn corner_index(&self) -> Option<usize> {
        if self.level != 0 {
            return None;
        }
        match self.bary.iter().position(|&p| p == 1) {
            Some(i) => Some(i + 1),
            None => Some(0),
        }
    }

    pub fn is_corner(&self) -> bool {
        self.level == 0
    }
}

impl fmt::Display for VertexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, p) in self.bary.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for VertexKey {
    type Err = Error;

    /// Parses `n:p1,p2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed vertex key `{s}` (expected n:p,q)"));
        let (level, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let level: u32 = level.trim().parse().map_err(|_| bad())?;
        let bary = rest
            .split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(level, bary)
    }
}

/// Corners of the unit regular `dim`-simplex: `a_1` at the origin, each
/// further corner above the centroid of the previous ones.
pub fn simplex_corners(dim: usize) -> Vec<Vec<f64>> {
    let mut corners = vec![vec![0.0; dim]];
    for k in 1..=dim {
        let mut centroid = vec![0.0; dim];
        for c in &corners {
            for (acc, x) in centroid.iter_mut().zip(c) {
                *acc += x;
            }
        }
        centroid.iter_mut().for_each(|x| *x /= k as f64);
        // circumradius of the regular (k-1)-simplex with unit side
        let r2 = (k - 1) as f64 / (2.0 * k as f64);
        centroid[k - 1] = (1.0 - r2).sqrt();
        corners.push(centroid);
    }
    corners
}

/// Ambient point of `key`: `a_1 + Σ (p_i / 2^n)(a_{i+1} - a_1)`.
pub fn vertex_coords(key: &VertexKey, corners: &[Vec<f64>]) -> Vec<f64> {
    assert_eq!(corners.len(), key.dim() + 1, "corner count does not match key dimension");
    let scale = (1u64 << key.level()) as f64;
    let origin = &corners[0];
    let mut point = origin.clone();
    for (i, &p) in key.bary().iter().enumerate() {
        if p == 0 {
            continue;
        }
        let w = p as f64 / scale;
        for (x, (a, o)) in point.iter_mut().zip(corners[i + 1].iter().zip(origin)) {
            *x += w * (a - o);
        }
    }
    point
}

/// An oriented edge; `tail` has the smaller id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    /// Signed incidence of vertex `v`: +1 at the parameter origin, -1 at the end.
    pub fn incidence(&self, v: usize) -> i8 {
        if v == self.tail {
            1
        } else if v == self.head {
            -1
        } else {
            0
        }
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: usize,
    pub edge: usize,
}

/// Immutable level-`n` prefractal graph.
#[derive(Debug, Clone)]
pub struct PrefractalGraph {
    dim: usize,
    level: u32,
    h: f64,
    keys: Vec<VertexKey>,
    index: HashMap<VertexKey, usize>,
    coords: Vec<Vec<f64>>,
    corners: Vec<Vec<f64>>,
    adjacency: Vec<Vec<Neighbor>>,
    edges: Vec<Edge>,
    boundary: Vec<usize>,
    // corner ids of every level-n cell, stride dim + 1
    cells: Vec<usize>,
}

/// Build `S^n` for the `dim`-simplex under the configured cell budget.
pub fn build_prefractal(dim: usize, level: u32) -> Result<PrefractalGraph> {
    build_prefractal_with_budget(dim, level, cell_budget())
}

pub fn build_prefractal_with_budget(dim: usize, level: u32, budget: u64) -> Result<PrefractalGraph> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    check_budget(dim, level, budget)?;
    let mut g = PrefractalGraph::initial(dim);
    for _ in 0..level {
        g = g.refine_unchecked();
    }
    Ok(g)
}

/// The level `n + 1` graph: every cell replaced by its `D + 1` corner sub-cells.
pub fn refine(g: &PrefractalGraph) -> Result<PrefractalGraph> {
    refine_with_budget(g, cell_budget())
}

pub fn refine_with_budget(g: &PrefractalGraph, budget: u64) -> Result<PrefractalGraph> {
    check_budget(g.dim, g.level + 1, budget)?;
    Ok(g.refine_unchecked())
}

/// Fails when `(D+1)^level` cells exceed `budget`.
pub fn check_budget(dim: usize, level: u32, budget: u64) -> Result<()> {
    let cells = (dim as u128 + 1).checked_pow(level).unwrap_or(u128::MAX);
    if cells > budget as u128 || level > 62 {
        return Err(Error::CellBudget {
            dim,
            level,
            cells,
            budget,
        });
    }
    Ok(())
}

impl PrefractalGraph {
    fn initial(dim: usize) -> Self {
        let cell: Vec<Vec<u64>> = (0..=dim).map(|i| VertexKey::corner(dim, i).scaled_to(0)).collect();
        Self::assemble(dim, 0, simplex_corners(dim), vec![cell])
    }

    fn refine_unchecked(&self) -> Self {
        let n = self.level;
        let stride = self.dim + 1;
        let scaled: Vec<Vec<u64>> = self.keys.iter().map(|k| k.scaled_to(n)).collect();
        let mut cells = Vec::with_capacity(self.cell_count() * stride);
        for cell in self.cells.chunks(stride) {
            // corner j of sub-cell i is the midpoint of corners i and j,
            // i.e. their numerator sum at level n + 1
            for &ci in cell {
                let sub: Vec<Vec<u64>> = cell
                    .iter()
                    .map(|&cj| scaled[ci].iter().zip(&scaled[cj]).map(|(a, b)| a + b).collect())
                    .collect();
                cells.push(sub);
            }
        }
        Self::assemble(self.dim, n + 1, self.corners.clone(), cells)
    }

    /// Index vertices, edges and cells from cells given as scaled numerators at `level`.
    fn assemble(dim: usize, level: u32, corners: Vec<Vec<f64>>, raw_cells: Vec<Vec<Vec<u64>>>) -> Self {
        let to_key = |bary: &Vec<u64>| {
            VertexKey {
                level,
                bary: bary.clone(),
            }
            .canonicalize()
        };
        let mut keys: Vec<VertexKey> = raw_cells.iter().flatten().map(to_key).collect();
        keys.sort_unstable();
        keys.dedup();
        let index: HashMap<VertexKey, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

        let mut cells = Vec::with_capacity(raw_cells.len() * (dim + 1));
        let mut edges = Vec::with_capacity(raw_cells.len() * dim * (dim + 1) / 2);
        for cell in &raw_cells {
            let ids: Vec<usize> = cell.iter().map(|b| index[&to_key(b)]).collect();
            for (a, &u) in ids.iter().enumerate() {
                for &v in &ids[a + 1..] {
                    edges.push(Edge {
                        tail: u.min(v),
                        head: u.max(v),
                    });
                }
            }
            cells.extend(ids);
        }
        edges.sort_unstable();
        edges.dedup();

        let mut adjacency = vec![Vec::new(); keys.len()];
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.tail].push(Neighbor {
                vertex: edge.head,
                edge: e,
            });
            adjacency[edge.head].push(Neighbor {
                vertex: edge.tail,
                edge: e,
            });
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|nb| nb.vertex);
        }

        let coords = keys.iter().map(|k| vertex_coords(k, &corners)).collect();
        let boundary = (0..=dim).map(|i| index[&VertexKey::corner(dim, i)]).collect();
        Self {
            dim,
            level,
            h: 1.0 / (1u64 << level) as f64,
            keys,
            index,
            coords,
            corners,
            adjacency,
            edges,
            boundary,
            cells,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Edge length `2^-n`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn keys(&self) -> &[VertexKey] {
        &self.keys
    }

    pub fn key(&self, v: usize) -> &VertexKey {
        &self.keys[v]
    }

    pub fn id_of(&self, key: &VertexKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn coords(&self, v: usize) -> &[f64] {
        &self.coords[v]
    }

    pub fn all_coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    /// Corners `a_1, …, a_{D+1}` of the initial simplex.
    pub fn corners(&self) -> &[Vec<f64>] {
        &self.corners
    }

    pub fn neighbors(&self, v: usize) -> &[Neighbor] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|nb| nb.vertex == b).map(|nb| nb.edge)
    }

    /// Ids of the simplex corners, in corner order `a_1, …, a_{D+1}`.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn corner_id(&self, i: usize) -> usize {
        self.boundary[i]
    }

    pub fn is_corner(&self, v: usize) -> bool {
        self.keys[v].is_corner()
    }

    /// Corner ids of cell `c`.
    pub fn cell(&self, c: usize) -> &[usize] {
        let stride = self.dim + 1;
        &self.cells[c * stride..(c + 1) * stride]
    }

    /// Point at arclength `s` along edge `e`, measured from its tail.
    pub fn edge_point(&self, e: usize, s: f64) -> Vec<f64> {
        let Edge { tail, head } = self.edges[e];
        let t = s / self.h;
        self.coords[tail]
            .iter()
            .zip(&self.coords[head])
            .map(|(a, b)| a + t * (b - a))
            .collect()
    }

    pub fn to_json(&self) -> GraphDump {
        GraphDump {
            dim: self.dim,
            level: self.level,
            h: self.h,
            vertices: (0..self.vertex_count())
                .map(|v| VertexDump {
                    id: v,
                    bary: self.keys[v].scaled_to(self.level),
                    coords: self.coords[v].clone(),
                })
                .collect(),
            edges: self.edges.iter().map(|e| [e.tail, e.head]).collect(),
            boundary: self.boundary.clone(),
        }
    }

    /// Rebuild the graph a dump describes, rejecting dumps that do not match
    /// the deterministic construction exactly.
    pub fn from_json(dump: &GraphDump) -> Result<Self> {
        let g = build_prefractal(dump.dim, dump.level)?;
        let mismatch = |what: &str| Error::Format(format!("graph dump does not match the level-{} gasket: {what}", dump.level));
        if dump.vertices.len() != g.vertex_count() {
            return Err(mismatch("vertex count"));
        }
        for (v, vd) in dump.vertices.iter().enumerate() {
            if vd.id != v || vd.bary != g.keys[v].scaled_to(g.level) {
                return Err(mismatch(&format!("vertex {v}")));
            }
            let far = vd.coords.len() != g.dim
                || vd.coords.iter().zip(&g.coords[v]).any(|(a, b)| (a - b).abs() > 1e-12);
            if far {
                return Err(mismatch(&format!("coordinates of vertex {v}")));
            }
        }
        let edges: Vec<[usize; 2]> = g.edges.iter().map(|e| [e.tail, e.head]).collect();
        if dump.edges != edges {
            return Err(mismatch("edge list"));
        }
        if dump.boundary != g.boundary {
            return Err(mismatch("boundary"));
        }
        Ok(g)
    }
}

/// JSON graph schema consumed by the command-line front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    #[serde(rename = "D")]
    pub dim: usize,
    pub level: u32,
    pub h: f64,
    pub vertices: Vec<VertexDump>,
    pub edges: Vec<[usize; 2]>,
    pub boundary: Vec<usize>,
}

/// One vertex of a [`GraphDump`]; `bary` holds numerators over `2^level` of the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDump {
    pub id: usize,
    pub bary: Vec<u64>,
    pub coords: Vec<f64>,
}
