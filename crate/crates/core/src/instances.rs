//! Seeded random instances for property runs: smooth positive fields with a
//! known range and boundary data that is compatible at every level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::BoundaryData;
use crate::fieldexpr::ScalarField;
use crate::gasket::{build_prefractal, VertexKey};
use crate::metric::hop_distances;

#[derive(Debug, Clone)]
pub struct Instance {
    pub f: ScalarField,
    pub gb: BoundaryData,
}

/// Deterministic stream of instances for a seed.
#[derive(Debug, Clone)]
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
    dim: usize,
}

impl InstanceGenerator {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
        }
    }

    /// A field with values in `[lo, hi]` everywhere:
    /// `mid + amp (w1 sin(k1 x + φ1) + w2 cos(k2 y + φ2) + w3 sin(k3 (x + y) + φ3))`
    /// with `|w1| + |w2| + |w3| ≤ 1`.
    pub fn field(&mut self, lo: f64, hi: f64) -> ScalarField {
        assert!(0.0 < lo && lo <= hi, "field range must be positive");
        let mid = 0.5 * (lo + hi);
        let amp = 0.5 * (hi - lo);
        let mut w: [f64; 3] = std::array::from_fn(|_| self.rng.gen_range(-1.0..1.0));
        let norm: f64 = w.iter().map(|v: &f64| v.abs()).sum::<f64>().max(1.0);
        for v in &mut w {
            *v *= amp / norm;
        }
        let k: [f64; 3] = std::array::from_fn(|_| self.rng.gen_range(0.5..6.0));
        let p: [f64; 3] = std::array::from_fn(|_| self.rng.gen_range(0.0..std::f64::consts::TAU));
        let text = format!(
            "{mid} + ({}) * sin({} * x + {}) + ({}) * cos({} * y + {}) + ({}) * sin({} * (x + y) + {})",
            w[0], k[0], p[0], w[1], k[1], p[1], w[2], k[2], p[2]
        );
        ScalarField::parse(&text).expect("generated fields parse")
    }

    /// Corner data with pairwise differences below `min_f`. Every path
    /// between distinct corners has length at least 1, so its cost exceeds
    /// every difference and the data is compatible at all levels.
    pub fn corner_boundary(&mut self, min_f: f64) -> BoundaryData {
        let base = self.rng.gen_range(-1.0..1.0);
        let values: Vec<f64> = (0..=self.dim).map(|_| base + self.rng.gen_range(0.0..0.99) * min_f).collect();
        BoundaryData::corners(self.dim, &values).expect("one value per corner")
    }

    /// `count` distinct vertices of the level-`level` graph (always including
    /// `a_1`) with data `θ min_f d(x, x0)` for a random anchor `x0` and
    /// `θ < 1`; every path cost dominates the differences, so the data is
    /// compatible.
    pub fn vertex_set_boundary(&mut self, level: u32, count: usize, min_f: f64) -> BoundaryData {
        let g = build_prefractal(self.dim, level).expect("small level");
        let count = count.clamp(1, g.vertex_count());
        let mut chosen = vec![g.corner_id(0)];
        while chosen.len() < count {
            let v = self.rng.gen_range(0..g.vertex_count());
            if !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        let anchor = self.rng.gen_range(0..g.vertex_count());
        let hops = hop_distances(&g, &[anchor]);
        let theta = self.rng.gen_range(0.0..0.99);
        let points: Vec<(VertexKey, f64)> = chosen
            .into_iter()
            .map(|v| (g.key(v).clone(), theta * min_f * hops[v] as f64 * g.h()))
            .collect();
        BoundaryData::new(points).expect("distinct vertices")
    }

    /// Field in `[lo, hi]` with compatible corner data.
    pub fn instance(&mut self, lo: f64, hi: f64) -> Instance {
        let f = self.field(lo, hi);
        let gb = self.corner_boundary(lo);
        Instance { f, gb }
    }

    /// Two instances with `f1 ≤ f2` and `g1 ≤ g2` pointwise.
    pub fn ordered_pair(&mut self, lo: f64, hi: f64) -> (Instance, Instance) {
        let first = self.instance(lo, hi);
        let top = self.rng.gen_range(0.02..1.0);
        let bump = self.field(0.01, top);
        let f2 = ScalarField::parse(&format!("({}) + ({})", first.f, bump)).expect("sum of fields parses");
        let lift = self.rng.gen_range(0.0..0.5);
        let points = first
            .gb
            .points()
            .iter()
            .map(|(k, v)| (k.clone(), v + lift * self.rng.gen_range(0.0..1.0)))
            .collect();
        let gb2 = BoundaryData::new(points).expect("same vertices");
        let second = Instance { f: f2, gb: gb2 };
        (first, second)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
