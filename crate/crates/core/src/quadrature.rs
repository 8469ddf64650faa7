//! Composite Simpson integration of a field along straight edges.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldexpr::ScalarField;
use crate::gasket::PrefractalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Starting panel count, a power of two.
    pub panels_per_edge: usize,
    /// Absolute tolerance between successive doublings.
    pub refine_until: f64,
    /// Doubling stops with an error beyond this many panels.
    pub max_panels: usize,
}

impl QuadratureConfig {
    pub const DEFAULT_PANELS: usize = 8;
    pub const DEFAULT_MAX_PANELS: usize = 1 << 16;

    /// Defaults for level `n`: 8 panels, tolerance `1e-12 h_n`.
    pub fn for_level(n: u32) -> Self {
        Self {
            panels_per_edge: Self::DEFAULT_PANELS,
            refine_until: 1e-12 / (1u64 << n) as f64,
            max_panels: Self::DEFAULT_MAX_PANELS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels_per_edge < 2 || !self.panels_per_edge.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "panels_per_edge must be a power of two >= 2, got {}",
                self.panels_per_edge
            )));
        }
        if self.refine_until.is_nan() || self.refine_until <= 0.0 {
            return Err(Error::InvalidArgument(format!("refine_until must be positive, got {}", self.refine_until)));
        }
        if self.max_panels < self.panels_per_edge {
            return Err(Error::InvalidArgument("max_panels is below panels_per_edge".into()));
        }
        Ok(())
    }
}

fn simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, panels: usize) -> Result<f64> {
    let w = (b - a) / panels as f64;
    let mut sum = 0.0;
    let mut fa = f(a)?;
    for i in 0..panels {
        let x0 = a + w * i as f64;
        let fm = f(x0 + 0.5 * w)?;
        let fb = f(if i + 1 == panels { b } else { x0 + w })?;
        sum += w * (fa + 4.0 * fm + fb) / 6.0;
        fa = fb;
    }
    Ok(sum)
}

/// `∫_a^b f(t) dt` with panel doubling.
pub fn integrate(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = q.panels_per_edge;
    let mut prev = simpson(f, a, b, panels)?;
    loop {
        panels *= 2;
        if panels > q.max_panels {
            let change = (simpson(f, a, b, panels / 2)? - prev).abs();
            return Err(Error::Quadrature {
                tolerance: q.refine_until,
                panels: panels / 2,
                change,
            });
        }
        let next = simpson(f, a, b, panels)?;
        let change = (next - prev).abs();
        prev = next;
        if change <= q.refine_until {
            return Ok(next);
        }
    }
}

/// `∫_{s0}^{s1} f(π(s)) ds` along edge `e`, `s` measured from the edge's tail.
pub fn edge_integral(g: &PrefractalGraph, f: &ScalarField, e: usize, s0: f64, s1: f64, q: &QuadratureConfig) -> Result<f64> {
    let at = |s: f64| -> Result<f64> { Ok(f.eval(&g.edge_point(e, s))?) };
    integrate(&at, s0, s1, q)
}

/// `c_e = ∫_e f ds`.
pub fn edge_cost(g: &PrefractalGraph, f: &ScalarField, e: usize, q: &QuadratureConfig) -> Result<f64> {
    edge_integral(g, f, e, 0.0, g.h(), q)
}
