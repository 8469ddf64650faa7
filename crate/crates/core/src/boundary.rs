//! Dirichlet data on a finite vertex set (the simplex corners by default).
//!
//! Data is addressed by canonical vertex keys, so one [`BoundaryData`] can be
//! resolved against graphs of every level that contains its vertices.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::fieldexpr::ScalarField;
use crate::gasket::{simplex_corners, vertex_coords, PrefractalGraph, VertexKey};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    points: Vec<(VertexKey, f64)>,
}

/// Boundary data resolved against one graph: `(vertex id, value)` pairs.
pub type ResolvedBoundary = Vec<(usize, f64)>;

impl BoundaryData {
    /// Arbitrary vertex set with values. Duplicate vertices are rejected.
    pub fn new(points: Vec<(VertexKey, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let mut seen = HashSet::new();
        for (k, v) in &points {
            if !seen.insert(k) {
                return Err(Error::InvalidArgument(format!("boundary vertex {k} listed twice")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("boundary value at {k} is not finite")));
            }
        }
        Ok(Self { points })
    }

    /// One value per simplex corner `a_1, …, a_{D+1}`.
    pub fn corners(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} corner values for dimension {dim}, got {}",
                dim + 1,
                values.len()
            )));
        }
        Self::new((0..=dim).map(|i| VertexKey::corner(dim, i)).zip(values.iter().copied()).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self::corners(dim, &vec![0.0; dim + 1]).expect("well-formed corner data")
    }

    /// Values of `expr` at the given vertices.
    pub fn from_expr(expr: &ScalarField, vertices: &[VertexKey]) -> Result<Self> {
        let dim = vertices.first().ok_or(Error::EmptyBoundary)?.dim();
        let corners = simplex_corners(dim);
        let points = vertices
            .iter()
            .map(|k| Ok((k.clone(), expr.eval(&vertex_coords(k, &corners))?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    /// Parse a comma-separated value list such as `0,0.5,0.25`.
    pub fn parse_values(text: &str) -> Result<Vec<f64>> {
        text.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("malformed boundary value `{}`", t.trim())))
            })
            .collect()
    }

    pub fn points(&self) -> &[(VertexKey, f64)] {
        &self.points
    }

    pub fn keys(&self) -> impl Iterator<Item = &VertexKey> {
        self.points.iter().map(|(k, _)| k)
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    /// Same vertices, each value raised by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            points: self.points.iter().map(|(k, v)| (k.clone(), v + delta)).collect(),
        }
    }

    /// Look up every boundary vertex in `g`.
    pub fn resolve(&self, g: &PrefractalGraph) -> Result<ResolvedBoundary> {
        self.points
            .iter()
            .map(|(k, v)| {
                if k.dim() != g.dim() {
                    return Err(Error::InvalidArgument(format!("boundary vertex {k} has the wrong dimension")));
                }
                let id = g.id_of(k).ok_or_else(|| Error::UnknownVertex(format!("{k} is not a vertex of level {}", g.level())))?;
                Ok((id, *v))
            })
            .collect()
    }

    /// Compact echo for metadata: `key=value` pairs.
    pub fn describe(&self) -> String {
        self.points
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::build_prefractal;

    #[test]
    fn corner_data_resolves_at_every_level() {
        let b = BoundaryData::corners(2, &[0.0, 0.5, 0.25]).unwrap();
        for n in 0..4 {
            let g = build_prefractal(2, n).unwrap();
            let r = b.resolve(&g).unwrap();
            let ids: Vec<usize> = r.iter().map(|(v, _)| *v).collect();
            assert_eq!(ids, g.boundary());
            assert_eq!(r[1].1, 0.5);
        }
        assert_eq!(b.max_abs(), 0.5);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(BoundaryData::corners(2, &[0.0, 1.0]).is_err());
        assert!(matches!(BoundaryData::new(vec![]), Err(Error::EmptyBoundary)));
        let k = VertexKey::corner(2, 0);
        assert!(BoundaryData::new(vec![(k.clone(), 0.0), (k, 1.0)]).is_err());
        assert!(BoundaryData::parse_values("0,a,1").is_err());
        assert_eq!(BoundaryData::parse_values("0, 2 ,0").unwrap(), vec![0.0, 2.0, 0.0]);
    }

    #[test]
    fn fine_vertex_is_unknown_on_coarse_graph() {
        let k = VertexKey::new(2, vec![1, 1]).unwrap();
        let b = BoundaryData::new(vec![(k, 0.0)]).unwrap();
        assert!(b.resolve(&build_prefractal(2, 1).unwrap()).is_err());
        assert!(b.resolve(&build_prefractal(2, 2).unwrap()).is_ok());
    }

    #[test]
    fn expression_data() {
        let keys: Vec<VertexKey> = (0..3).map(|i| VertexKey::corner(2, i)).collect();
        let b = BoundaryData::from_expr(&ScalarField::parse("x").unwrap(), &keys).unwrap();
        let values: Vec<f64> = b.points().iter().map(|p| p.1).collect();
        assert_eq!(values, vec![0.0, 1.0, 0.5]);
    }
}
