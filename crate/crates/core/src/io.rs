//! Solution files: a CSV of vertex values plus a JSON metadata sidecar.
//!
//! Columns are `id,level,p,q,x,y,value`, where `level` is the level of the
//! graph the solution lives on and `p, q` are the key numerators over
//! `2^level` (`q = 0` on the interval). Dimensions above two list every
//! numerator and coordinate: `id,level,p1,…,pD,x1,…,xD,value`. Reals are
//! written with 17 significant digits, so they read back bit for bit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gasket::{PrefractalGraph, VertexKey};
use crate::solution::{NodeSolution, VerifierReport};

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(dim: usize) -> String {
    if dim <= 2 {
        return "id,level,p,q,x,y,value".into();
    }
    let p: Vec<String> = (1..=dim).map(|i| format!("p{i}")).collect();
    let x: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    format!("id,level,{},{},value", p.join(","), x.join(","))
}

/// CSV text for a solution on `g`.
pub fn solution_csv(g: &PrefractalGraph, sol: &NodeSolution) -> Result<String> {
    if sol.level != g.level() || sol.values.len() != g.vertex_count() {
        return Err(Error::InvalidArgument("solution does not live on the given graph".into()));
    }
    let width = g.dim().max(2);
    let mut out = header(g.dim());
    out.push('\n');
    for v in 0..g.vertex_count() {
        let mut bary = g.key(v).scaled_to(g.level());
        bary.resize(width, 0);
        let mut coords = g.coords(v).to_vec();
        coords.resize(width, 0.0);
        let cells: Vec<String> = [v.to_string(), g.level().to_string()]
            .into_iter()
            .chain(bary.iter().map(u64::to_string))
            .chain(coords.iter().map(|&c| fmt_real(c)))
            .chain(std::iter::once(fmt_real(sol.values[v])))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Vertex values read back from a solution CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub dim: usize,
    pub level: u32,
    pub keys: Vec<VertexKey>,
    pub values: Vec<f64>,
}

impl SolutionFile {
    /// Parse CSV text. On two-column files the dimension is 1 when every `q`
    /// and `y` is zero, 2 otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, m: String| Error::Format(format!("solution CSV line {line}: {m}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
        let cols: Vec<&str> = head.split(',').map(str::trim).collect();
        if cols.len() < 5 || cols[0] != "id" || cols[1] != "level" || cols[cols.len() - 1] != "value" {
            return Err(bad(1, format!("unexpected header `{head}`")));
        }
        let width = (cols.len() - 3) / 2;
        if width < 2 || header(width) != head.trim() {
            return Err(bad(1, format!("unexpected header `{head}`")));
        }
        let mut level = None;
        let mut rows = Vec::new();
        for (i, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != cols.len() {
                return Err(bad(i + 1, format!("{} cells, expected {}", cells.len(), cols.len())));
            }
            let id: usize = cells[0].parse().map_err(|_| bad(i + 1, format!("bad id `{}`", cells[0])))?;
            if id != rows.len() {
                return Err(bad(i + 1, format!("ids must be dense and ordered, found {id}")));
            }
            let lv: u32 = cells[1].parse().map_err(|_| bad(i + 1, format!("bad level `{}`", cells[1])))?;
            if *level.get_or_insert(lv) != lv {
                return Err(bad(i + 1, "mixed levels".into()));
            }
            let bary = cells[2..2 + width]
                .iter()
                .map(|c| c.parse::<u64>().map_err(|_| bad(i + 1, format!("bad numerator `{c}`"))))
                .collect::<Result<Vec<_>>>()?;
            let coords = cells[2 + width..2 + 2 * width]
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| bad(i + 1, format!("bad coordinate `{c}`"))))
                .collect::<Result<Vec<_>>>()?;
            let value: f64 = cells[cols.len() - 1]
                .parse()
                .map_err(|_| bad(i + 1, format!("bad value `{}`", cells[cols.len() - 1])))?;
            rows.push((bary, coords, value));
        }
        let level = level.ok_or_else(|| bad(2, "no rows".into()))?;
        let dim = if width == 2 && rows.iter().all(|(b, c, _)| b[1] == 0 && c[1] == 0.0) {
            1
        } else {
            width
        };
        let mut keys = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        for (mut bary, _, value) in rows {
            bary.truncate(dim);
            keys.push(VertexKey::new(level, bary)?);
            values.push(value);
        }
        Ok(Self { dim, level, keys, values })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Values in the id order of `g`, which must contain exactly these vertices.
    pub fn values_on(&self, g: &PrefractalGraph) -> Result<Vec<f64>> {
        if g.dim() != self.dim || g.level() != self.level || g.vertex_count() != self.keys.len() {
            return Err(Error::Format(format!(
                "solution file (D={}, level {}, {} rows) does not match the graph (D={}, level {}, {} vertices)",
                self.dim,
                self.level,
                self.keys.len(),
                g.dim(),
                g.level(),
                g.vertex_count()
            )));
        }
        let mut out = vec![f64::NAN; g.vertex_count()];
        for (k, &v) in self.keys.iter().zip(&self.values) {
            let id = g.id_of(k).ok_or_else(|| Error::UnknownVertex(k.to_string()))?;
            out[id] = v;
        }
        Ok(out)
    }
}

/// Contents of the `.meta.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionMeta {
    #[serde(rename = "D")]
    pub dim: usize,
    pub level: u32,
    pub solver: String,
    pub convention: String,
    pub f: String,
    pub g: String,
    pub compat: Option<serde_json::Value>,
    pub warnings: Vec<String>,
    /// Free-form echo of the producing configuration.
    pub config: serde_json::Value,
}

impl SolutionMeta {
    pub fn new(sol: &NodeSolution, f: &str, g: &str, config: serde_json::Value) -> Result<Self> {
        Ok(Self {
            dim: sol.dim,
            level: sol.level,
            solver: sol.solver.tag().into(),
            convention: sol.convention.tag().into(),
            f: f.into(),
            g: g.into(),
            compat: sol.compat.as_ref().map(serde_json::to_value).transpose()?,
            warnings: sol.warnings.clone(),
            config,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// `out.csv` → `out.csv.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Compact verdict record for a list of reports.
pub fn reports_json(reports: &[VerifierReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryData;
    use crate::discrete::solve_discrete;
    use crate::fieldexpr::ScalarField;
    use crate::gasket::build_prefractal;

    #[test]
    fn round_trip_plane() {
        let g = build_prefractal(2, 3).unwrap();
        let sol = solve_discrete(&g, &ScalarField::parse("1+sin(x)").unwrap(), &BoundaryData::zero(2)).unwrap();
        let csv = solution_csv(&g, &sol).unwrap();
        assert!(csv.starts_with("id,level,p,q,x,y,value\n"));
        let back = SolutionFile::parse(&csv).unwrap();
        assert_eq!((back.dim, back.level), (2, 3));
        assert_eq!(back.values_on(&g).unwrap(), sol.values);
        assert_eq!(back.keys, g.keys());
    }

    #[test]
    fn round_trip_interval_and_tetrahedron() {
        let g = build_prefractal(1, 3).unwrap();
        let sol = solve_discrete(&g, &ScalarField::parse("1").unwrap(), &BoundaryData::zero(1)).unwrap();
        let csv = solution_csv(&g, &sol).unwrap();
        assert!(csv.contains(",3,4,0,5.0000000000000000e-1,0.0000000000000000e0,5.0000000000000000e-1\n"));
        let back = SolutionFile::parse(&csv).unwrap();
        assert_eq!(back.dim, 1);
        assert_eq!(back.values_on(&g).unwrap(), sol.values);

        let g = build_prefractal(3, 2).unwrap();
        let sol = solve_discrete(&g, &ScalarField::parse("1").unwrap(), &BoundaryData::zero(3)).unwrap();
        let csv = solution_csv(&g, &sol).unwrap();
        assert!(csv.starts_with("id,level,p1,p2,p3,x1,x2,x3,value\n"));
        assert_eq!(SolutionFile::parse(&csv).unwrap().values_on(&g).unwrap(), sol.values);
    }

    #[test]
    fn rejects_malformed() {
        assert!(SolutionFile::parse("").is_err());
        assert!(SolutionFile::parse("a,b,c\n").is_err());
        assert!(SolutionFile::parse("id,level,p,q,x,y,value\n").is_err());
        assert!(SolutionFile::parse("id,level,p,q,x,y,value\n1,0,0,0,0,0,0\n").is_err());
        assert!(SolutionFile::parse("id,level,p,q,x,y,value\n0,0,0,0,0,0,zz\n").is_err());
        let g = build_prefractal(2, 2).unwrap();
        let f = SolutionFile::parse("id,level,p,q,x,y,value\n0,1,0,0,0,0,0\n").unwrap();
        assert!(f.values_on(&g).is_err());
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("out/sol.csv")), PathBuf::from("out/sol.csv.meta.json"));
    }
}
