//! Multi-level harness: solves the graph and network problems on a range of
//! levels and tabulates the gaps between them, the level-to-level changes and
//! the distance to the finest network solution.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryData;
use crate::discrete::{check_compat_discrete, incompatible, solve_discrete};
use crate::error::{Error, Result};
use crate::fieldexpr::ScalarField;
use crate::gasket::{build_prefractal, PrefractalGraph};
use crate::metric::hops_within;
use crate::network::solve_network;
use crate::par;
use crate::quadrature::QuadratureConfig;
use crate::solution::sup_diff;

/// Gaps below this are treated as exact zeros by [`rate_fit`].
pub const GAP_FLOOR: f64 = 1e-13;

/// Finest vertex cloud used to sample the modulus of continuity.
pub const OMEGA_MAX_CLOUD_LEVEL: u32 = 6;

/// An estimate `ω̂(t)` of the modulus of continuity of `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum Omega {
    /// `ω̂(t) = L t`.
    Lipschitz(f64),
    /// `ω̂(t) = max |f(p) - f(q)|` over vertex pairs of the level-`level`
    /// graph with `d(p, q) ≤ t`; `table[r]` is the value at `r` hops.
    Sampled { level: u32, table: Vec<f64> },
}

impl Omega {
    pub fn lipschitz(l: f64) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("Lipschitz constant must be finite and >= 0, got {l}")));
        }
        Ok(Self::Lipschitz(l))
    }

    /// Sample `f` over the vertices of the level-`level` graph of dimension `dim`.
    pub fn sampled(dim: usize, f: &ScalarField, level: u32) -> Result<Self> {
        let g = build_prefractal(dim, level)?;
        let fv = f.at_vertices(&g)?;
        let radius = 1u64 << level;
        let rows = par::map_range(g.vertex_count(), |p| {
            let mut best = vec![0.0f64; radius as usize + 1];
            for (q, r) in hops_within(&g, p, radius) {
                let d = (fv[p] - fv[q]).abs();
                if d > best[r as usize] {
                    best[r as usize] = d;
                }
            }
            best
        });
        let mut table = vec![0.0f64; radius as usize + 1];
        for row in rows {
            for (t, v) in table.iter_mut().zip(row) {
                *t = t.max(v);
            }
        }
        for r in 1..table.len() {
            table[r] = table[r].max(table[r - 1]);
        }
        Ok(Self::Sampled { level, table })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Lipschitz(l) => l * t,
            Self::Sampled { level, table } => {
                let hops = (t * (1u64 << level) as f64 + 1e-9).floor();
                let r = if hops < 0.0 { 0 } else { (hops as usize).min(table.len() - 1) };
                table[r]
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Lipschitz(l) => format!("lipschitz(L={l})"),
            Self::Sampled { level, .. } => format!("sampled(level={level})"),
        }
    }
}

/// `f + ω̂(h_n)`.
pub fn repair_compatibility(f: &ScalarField, omega: &Omega, n: u32) -> ScalarField {
    f.shifted(omega.eval(1.0 / (1u64 << n) as f64))
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceOptions {
    /// Quadrature for every level; `None` uses [`QuadratureConfig::for_level`].
    pub quadrature: Option<QuadratureConfig>,
    /// User Lipschitz constant for `ω̂`; sampled otherwise.
    pub lipschitz: Option<f64>,
    /// Solve the graph problems with `f + ω̂(h_n)`.
    pub repair: bool,
    /// Fail on incompatible data instead of solving anyway.
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFit {
    Slope(f64),
    /// All gaps were below [`GAP_FLOOR`].
    Exact,
}

impl std::fmt::Display for RateFit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Slope(s) => write!(f, "{s:.16e}"),
            Self::Exact => f.write_str("exact"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub h: f64,
    /// `sup_{V^n} |u_n - u_{h_n}|`, graph against network.
    pub gap: f64,
    /// `sup_{V^{n-1}} |u_{h_n} - u_{h_{n-1}}|`; absent on the first row.
    pub level_diff_network: Option<f64>,
    pub level_diff_discrete: Option<f64>,
    /// `sup_{V^n} |u_{h_n} - u_ref|`.
    pub gap_to_reference: f64,
    /// Slope of the gap column over the rows so far, once there are three.
    pub fitted_rate: Option<RateFit>,
    /// `ω̂(h_n^{1/2})`.
    pub omega_sqrt_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub f: String,
    pub gb: String,
    #[serde(rename = "D")]
    pub dim: usize,
    pub quadrature: String,
    pub omega_source: String,
    pub reference_level: u32,
    pub reference: String,
    pub repaired: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub meta: TableMeta,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Gap,
    LevelDiffNetwork,
    LevelDiffDiscrete,
    GapToReference,
}

impl ConvergenceRow {
    pub fn get(&self, c: Column) -> Option<f64> {
        match c {
            Column::Gap => Some(self.gap),
            Column::LevelDiffNetwork => self.level_diff_network,
            Column::LevelDiffDiscrete => self.level_diff_discrete,
            Column::GapToReference => Some(self.gap_to_reference),
        }
    }
}

/// Least-squares slope of `log(gap)` against `log(h)`, skipping gaps below
/// [`GAP_FLOOR`].
pub fn fit_slope(h: &[f64], gaps: &[f64]) -> Result<RateFit> {
    if h.len() != gaps.len() {
        return Err(Error::DegenerateFit("column lengths differ".into()));
    }
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(gaps)
        .filter(|(_, &gap)| gap >= GAP_FLOOR)
        .map(|(&h, &gap)| (h.ln(), gap.ln()))
        .collect();
    if pts.is_empty() && !gaps.is_empty() {
        return Ok(RateFit::Exact);
    }
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} usable rows, at least 3 needed", pts.len())));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all rows share one h".into()));
    }
    Ok(RateFit::Slope(sxy / sxx))
}

/// Rate of a table column against `h`.
pub fn rate_fit(table: &ConvergenceTable, column: Column) -> Result<RateFit> {
    let (h, gaps): (Vec<f64>, Vec<f64>) = table.rows.iter().filter_map(|r| r.get(column).map(|v| (r.h, v))).unzip();
    fit_slope(&h, &gaps)
}

struct LevelRun {
    graph: PrefractalGraph,
    discrete: Vec<f64>,
    network: Vec<f64>,
    warnings: Vec<String>,
}

/// Solve every level in `n_min..=n_max` and assemble the table.
pub fn run_levels(
    dim: usize,
    f: &ScalarField,
    gb: &BoundaryData,
    n_min: u32,
    n_max: u32,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceTable> {
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!("empty level range {n_min}..{n_max}")));
    }
    if let Some(q) = &opts.quadrature {
        q.validate()?;
    }
    // fail on the budget before any work
    crate::gasket::check_budget(dim, n_max, crate::gasket::cell_budget())?;
    let omega = match opts.lipschitz {
        Some(l) => Omega::lipschitz(l)?,
        None => Omega::sampled(dim, f, n_max.min(OMEGA_MAX_CLOUD_LEVEL))?,
    };
    let levels: Vec<u32> = (n_min..=n_max).collect();
    let runs = par::try_map_range(levels.len(), |i| {
        let n = levels[i];
        let g = build_prefractal(dim, n)?;
        let q = opts.quadrature.unwrap_or_else(|| QuadratureConfig::for_level(n));
        let fd = if opts.repair { repair_compatibility(f, &omega, n) } else { f.clone() };
        let compat = check_compat_discrete(&g, &fd, gb)?;
        if opts.strict && !compat.passed {
            return Err(incompatible(&compat));
        }
        let disc = solve_discrete(&g, &fd, gb)?;
        let net = solve_network(&g, f, gb, &q)?;
        let mut warnings = disc.warnings.clone();
        warnings.extend(net.vertex_values.warnings.iter().cloned());
        let warnings = warnings.into_iter().map(|w| format!("level {n}: {w}")).collect();
        Ok::<_, Error>(LevelRun {
            graph: g,
            discrete: disc.values,
            network: net.vertex_values.values,
            warnings,
        })
    })?;

    let finest = runs.last().expect("non-empty level range");
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let n = levels[i];
        let h = run.graph.h();
        let restrict_to = |fine: &LevelRun, coarse: &PrefractalGraph, values: &[f64]| -> Vec<f64> {
            coarse
                .keys()
                .iter()
                .map(|k| values[fine.graph.id_of(k).expect("coarse vertex in the fine graph")])
                .collect()
        };
        let (level_diff_network, level_diff_discrete) = if i == 0 {
            (None, None)
        } else {
            let prev = &runs[i - 1];
            (
                Some(sup_diff(&restrict_to(run, &prev.graph, &run.network), &prev.network)),
                Some(sup_diff(&restrict_to(run, &prev.graph, &run.discrete), &prev.discrete)),
            )
        };
        let gap = sup_diff(&run.discrete, &run.network);
        let gap_to_reference = sup_diff(&restrict_to(finest, &run.graph, &finest.network), &run.network);
        let mut row = ConvergenceRow {
            n,
            h,
            gap,
            level_diff_network,
            level_diff_discrete,
            gap_to_reference,
            fitted_rate: None,
            omega_sqrt_h: omega.eval(h.sqrt()),
        };
        if rows.len() >= 2 {
            let (hs, gaps): (Vec<f64>, Vec<f64>) = rows.iter().chain(std::iter::once(&row)).map(|r| (r.h, r.gap)).unzip();
            row.fitted_rate = fit_slope(&hs, &gaps).ok();
        }
        rows.push(row);
    }

    let quadrature = match &opts.quadrature {
        Some(q) => serde_json::to_string(q)?,
        None => format!(
            "simpson(panels_per_edge={}, refine_until=1e-12*h_n, max_panels={})",
            QuadratureConfig::DEFAULT_PANELS,
            QuadratureConfig::DEFAULT_MAX_PANELS
        ),
    };
    Ok(ConvergenceTable {
        meta: TableMeta {
            f: f.canonical(),
            gb: gb.describe(),
            dim,
            quadrature,
            omega_source: omega.describe(),
            reference_level: n_max,
            reference: "finest network solution".into(),
            repaired: opts.repair,
            warnings: runs.into_iter().flat_map(|r| r.warnings).collect(),
        },
        rows,
    })
}

const HEADER: &str = "n,h,sup_gap_discrete_network,sup_level_diff_network,sup_level_diff_discrete,sup_gap_to_reference,fitted_rate,omega_sqrt_h";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!("# meta: {}\n{HEADER}\n", serde_json::to_string(&self.meta)?);
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n,
                num(r.h),
                num(r.gap),
                opt(r.level_diff_network),
                opt(r.level_diff_discrete),
                num(r.gap_to_reference),
                r.fitted_rate.map(|f| f.to_string()).unwrap_or_default(),
                num(r.omega_sqrt_h)
            )
            .expect("writing to a String");
        }
        Ok(out)
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_csv()?.as_bytes())?;
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let bad = |m: &str| Error::Format(format!("convergence table: {m}"));
        let meta_line = lines.next().ok_or_else(|| bad("empty input"))??;
        let meta_json = meta_line.strip_prefix("# meta: ").ok_or_else(|| bad("missing `# meta:` line"))?;
        let meta: TableMeta = serde_json::from_str(meta_json)?;
        if lines.next().transpose()?.as_deref() != Some(HEADER) {
            return Err(bad("unexpected header"));
        }
        let mut rows = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 8 {
                return Err(bad(&format!("row has {} cells", cells.len())));
            }
            let f = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
            let of = |s: &str| if s.is_empty() { Ok(None) } else { f(s).map(Some) };
            rows.push(ConvergenceRow {
                n: cells[0].parse().map_err(|_| bad("bad level"))?,
                h: f(cells[1])?,
                gap: f(cells[2])?,
                level_diff_network: of(cells[3])?,
                level_diff_discrete: of(cells[4])?,
                gap_to_reference: f(cells[5])?,
                fitted_rate: match cells[6] {
                    "" => None,
                    "exact" => Some(RateFit::Exact),
                    s => Some(RateFit::Slope(f(s)?)),
                },
                omega_sqrt_h: f(cells[7])?,
            });
        }
        Ok(Self { meta, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(t: &str) -> ScalarField {
        ScalarField::parse(t).unwrap()
    }

    fn slope(fit: RateFit) -> f64 {
        match fit {
            RateFit::Slope(s) => s,
            RateFit::Exact => panic!("expected a slope"),
        }
    }

    #[test]
    fn synthetic_fits() {
        let h: Vec<f64> = (2..=8).map(|n| 0.5f64.powi(n)).collect();
        let lin: Vec<f64> = h.iter().map(|h| 3.0 * h).collect();
        let half: Vec<f64> = h.iter().map(|h| 0.7 * h.sqrt()).collect();
        assert!((slope(fit_slope(&h, &lin).unwrap()) - 1.0).abs() < 0.05);
        assert!((slope(fit_slope(&h, &half).unwrap()) - 0.5).abs() < 0.05);
        assert_eq!(fit_slope(&h, &vec![0.0; h.len()]).unwrap(), RateFit::Exact);
        assert!(fit_slope(&h[..2], &lin[..2]).is_err());
        let mut mixed = vec![0.0; h.len()];
        mixed[0] = 1.0;
        assert!(matches!(fit_slope(&h, &mixed), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn constant_field_is_exact() {
        let t = run_levels(2, &field("1"), &BoundaryData::zero(2), 1, 5, &ConvergenceOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 5);
        for r in &t.rows {
            assert_eq!(r.gap, 0.0);
            assert_eq!(r.gap_to_reference, 0.0);
            assert_eq!(r.omega_sqrt_h, 0.0);
            if r.n > 1 {
                assert_eq!(r.level_diff_network, Some(0.0));
                assert_eq!(r.level_diff_discrete, Some(0.0));
            }
        }
        assert_eq!(rate_fit(&t, Column::Gap).unwrap(), RateFit::Exact);
        assert_eq!(t.rows[2].fitted_rate, Some(RateFit::Exact));
    }

    #[test]
    fn affine_field_rates() {
        let opts = ConvergenceOptions {
            lipschitz: Some(1.0),
            ..Default::default()
        };
        let t = run_levels(2, &field("1+x"), &BoundaryData::zero(2), 2, 6, &opts).unwrap();
        for w in t.rows.windows(2) {
            assert!(w[1].gap < w[0].gap);
        }
        assert!(slope(rate_fit(&t, Column::Gap).unwrap()) >= 0.5);
        assert_eq!(t.rows.last().unwrap().gap_to_reference, 0.0);
        assert_eq!(t.meta.omega_source, "lipschitz(L=1)");
    }

    #[test]
    fn omega_estimates() {
        assert_eq!(Omega::Lipschitz(1.0).eval(0.125), 0.125);
        assert!(Omega::lipschitz(-1.0).is_err());
        let one = Omega::sampled(2, &field("1"), 4).unwrap();
        assert_eq!(one.eval(0.5), 0.0);
        let lin = Omega::sampled(2, &field("1+x"), 4).unwrap();
        // along the bottom side |Δx| equals the distance
        assert!((lin.eval(0.25) - 0.25).abs() < 1e-12);
        assert_eq!(lin.eval(0.01), 0.0);
        for n in 1..8 {
            let t = 0.5f64.powi(n);
            assert!(lin.eval(t / 2.0) <= lin.eval(t));
        }
    }

    #[test]
    fn repair_shifts_by_omega() {
        let f = field("1+x");
        let r = repair_compatibility(&f, &Omega::Lipschitz(1.0), 3);
        assert_eq!(r.eval(&[0.0, 0.0]).unwrap(), 1.125);
        assert_eq!(repair_compatibility(&field("1"), &Omega::Lipschitz(0.0), 3), field("1"));
    }

    #[test]
    fn csv_round_trip() {
        let t = run_levels(2, &field("1+x*y"), &BoundaryData::zero(2), 1, 4, &ConvergenceOptions::default()).unwrap();
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("# meta: {"));
        let back = ConvergenceTable::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn bad_ranges() {
        let opts = ConvergenceOptions::default();
        assert!(run_levels(2, &field("1"), &BoundaryData::zero(2), 3, 2, &opts).is_err());
    }
}
