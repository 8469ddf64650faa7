//! Label-setting shortest-path sweep shared by the graph and network solvers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::gasket::{Neighbor, PrefractalGraph};

#[derive(Debug, Clone, Copy)]
struct Entry {
    value: f64,
    vertex: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap; equal values settle in id order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Minimal values `u(x) = min(seed(x), u(z) + step(x, z))` over the graph,
/// computed from the seeded vertices outward. `step(x, nb)` is the cost of
/// leaving `x` towards the neighbor `nb` and must be positive.
///
/// Unreached vertices are left at `+inf`.
pub(crate) fn label_setting<F>(g: &PrefractalGraph, seeds: &[(usize, f64)], step: F) -> Vec<f64>
where
    F: Fn(usize, &Neighbor) -> f64,
{
    let n = g.vertex_count();
    let mut value = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(n);
    for &(v, s) in seeds {
        if s < value[v] {
            value[v] = s;
            heap.push(Entry { value: s, vertex: v });
        }
    }
    while let Some(Entry { value: uz, vertex: z }) = heap.pop() {
        if settled[z] || uz > value[z] {
            continue;
        }
        settled[z] = true;
        for nb in g.neighbors(z) {
            let x = nb.vertex;
            if settled[x] {
                continue;
            }
            // the edge seen from x back towards z
            let back = Neighbor { vertex: z, edge: nb.edge };
            let candidate = uz + step(x, &back);
            if candidate < value[x] {
                value[x] = candidate;
                heap.push(Entry { value: candidate, vertex: x });
            }
        }
    }
    value
}

/// Forward costs from `source` to every vertex: `d(w) = min d(v) + step(v, w)`.
pub(crate) fn forward_costs<F>(g: &PrefractalGraph, source: usize, step: F) -> Vec<f64>
where
    F: Fn(usize, &Neighbor) -> f64,
{
    // leaving v towards w forward is the reverse sweep with roles swapped
    label_setting(g, &[(source, 0.0)], |x, back| {
        let forward = Neighbor { vertex: x, edge: back.edge };
        step(back.vertex, &forward)
    })
}
