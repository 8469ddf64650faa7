//! `gasket-eikonal`: build prefractal graphs, solve graph and network eikonal
//! problems, query distances, run convergence studies and verify solution files.
//!
//! Exit codes: 0 success, 1 usage or validation error (or a failed verifier),
//! 2 incompatible boundary data under `--strict`, 3 resource budget exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gasket_eikonal::discrete::discrete_battery;
use gasket_eikonal::gasket::{build_prefractal, CELL_BUDGET_ENV};
use gasket_eikonal::instances::InstanceGenerator;
use gasket_eikonal::io::{sidecar_path, solution_csv, SolutionFile, SolutionMeta};
use gasket_eikonal::network::network_battery;
use gasket_eikonal::{
    brute_force_solution, geodesic_estimate, run_levels, solve_discrete_with, solve_network_with, value_iteration, BoundaryData,
    ConvergenceOptions, Error, NodeSolution, PointSpec, QuadratureConfig, ScalarField, SolveOptions, VertexKey, VerifierReport,
};

#[derive(Parser, Debug)]
#[command(name = "gasket-eikonal", version, about = "Eikonal equations on Sierpinski gasket prefractals")]
#[command(after_help = format!("Environment: {CELL_BUDGET_ENV} overrides the cell budget (default 3^13)."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the level-n prefractal graph as JSON.
    Build(BuildArgs),
    /// Solve one instance and write the vertex values as CSV.
    Solve(SolveArgs),
    /// Distance between two points of the gasket.
    Distance(DistanceArgs),
    /// Solve a range of levels and tabulate gaps and rates.
    Converge(ConvergeArgs),
    /// Run the verifier battery on a solution file or on random instances.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Dimension of the simplex.
    #[arg(short = 'D', long = "dim", default_value_t = 2)]
    dim: usize,
    /// Prefractal level.
    #[arg(short = 'n', long = "level", default_value_t = 0)]
    level: u32,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Right-hand side f(x, y), a positive expression.
    #[arg(long = "f", default_value = "1")]
    f: String,
    /// Boundary values, one per boundary vertex (comma separated); zeros by default.
    #[arg(long = "g", conflicts_with = "g_expr", allow_hyphen_values = true)]
    g: Option<String>,
    /// Boundary values as an expression evaluated at each boundary vertex.
    #[arg(long = "g-expr")]
    g_expr: Option<String>,
    /// Boundary vertex set replacing the corners, as keys `n:p,q` separated by `;`.
    #[arg(long = "boundary", value_delimiter = ';')]
    boundary: Vec<String>,
}

#[derive(Args, Debug)]
struct QuadArgs {
    /// Starting Simpson panels per edge (power of two).
    #[arg(long = "panels", default_value_t = QuadratureConfig::DEFAULT_PANELS)]
    panels: usize,
    /// Absolute refinement tolerance per edge integral; 1e-12 h_n by default.
    #[arg(long = "refine-until")]
    refine_until: Option<f64>,
    /// Panel cap for refinement.
    #[arg(long = "max-panels", default_value_t = QuadratureConfig::DEFAULT_MAX_PANELS)]
    max_panels: usize,
}

impl QuadArgs {
    fn config(&self, level: u32) -> QuadratureConfig {
        let base = QuadratureConfig::for_level(level);
        QuadratureConfig {
            panels_per_edge: self.panels,
            refine_until: self.refine_until.unwrap_or(base.refine_until),
            max_panels: self.max_panels,
        }
    }

    fn is_default(&self) -> bool {
        self.panels == QuadratureConfig::DEFAULT_PANELS && self.refine_until.is_none() && self.max_panels == QuadratureConfig::DEFAULT_MAX_PANELS
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Discrete,
    Network,
    ValueIteration,
    BruteForce,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Network => "network",
            Mode::ValueIteration => "value-iteration",
            Mode::BruteForce => "brute-force",
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[arg(long = "mode", value_enum, default_value_t = Mode::Discrete)]
    mode: Mode,
    /// Exit with code 2 instead of solving incompatible boundary data.
    #[arg(long)]
    strict: bool,
    /// CSV output file (a `.meta.json` sidecar is written next to it); standard output when absent.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
    /// Network mode: print `edge_id,s,value` for the point at arclength s on an edge.
    #[arg(long = "eval", value_name = "EDGE:S")]
    eval: Vec<String>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Endpoint: corner `a1`, key `n:p,q`, or `edge:k:s`.
    #[arg(long = "from")]
    from: String,
    /// Other endpoint, same forms as `--from`.
    #[arg(long = "to")]
    to: String,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// Dimension of the simplex.
    #[arg(short = 'D', long = "dim", default_value_t = 2)]
    dim: usize,
    /// Level range `a..b` (inclusive) or a single level.
    #[arg(long = "levels", default_value = "1..6")]
    levels: String,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Lipschitz constant of f for the modulus estimate; sampled when absent.
    #[arg(long = "lipschitz")]
    lipschitz: Option<f64>,
    /// Solve the graph problems with f + omega(h_n).
    #[arg(long)]
    repair: bool,
    /// Exit with code 2 if any level has incompatible boundary data.
    #[arg(long)]
    strict: bool,
    /// CSV output file; standard output when absent.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Solution CSV to verify.
    #[arg(long = "solution", required_unless_present = "random")]
    solution: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Verify as a network solution; read from the sidecar when present.
    #[arg(long)]
    network: bool,
    /// Verifier tolerance.
    #[arg(long = "tol", default_value_t = 1e-10)]
    tol: f64,
    /// Exit with code 2 when the boundary data is incompatible.
    #[arg(long)]
    strict: bool,
    /// Instead of a file, solve and verify this many random instances.
    #[arg(long = "random", conflicts_with = "solution")]
    random: Option<usize>,
    /// Seed for `--random`.
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// Dimension and level of the random instances.
    #[command(flatten)]
    graph: GraphArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Incompatible { .. } => 2,
            Error::CellBudget { .. } | Error::EnumerationBudget(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn validate_graph(g: &GraphArgs) -> CmdResult {
    if g.dim == 0 {
        return Err(usage("dimension must be at least 1"));
    }
    Ok(())
}

fn parse_field(text: &str) -> Result<ScalarField, Failure> {
    ScalarField::parse(text).map_err(|e| usage(format!("--f: {e}")))
}

fn boundary_data(dim: usize, data: &DataArgs) -> Result<BoundaryData, Failure> {
    let keys: Vec<VertexKey> = if data.boundary.is_empty() {
        (0..=dim).map(|i| VertexKey::corner(dim, i)).collect()
    } else {
        data.boundary
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<VertexKey>().map_err(|e| usage(format!("--boundary: {e}"))))
            .collect::<Result<_, _>>()?
    };
    if let Some(k) = keys.iter().find(|k| k.dim() != dim) {
        return Err(usage(format!("--boundary: key {k} does not have {dim} numerators")));
    }
    if let Some(expr) = &data.g_expr {
        let e = ScalarField::parse(expr).map_err(|e| usage(format!("--g-expr: {e}")))?;
        return Ok(BoundaryData::from_expr(&e, &keys)?);
    }
    let values = match &data.g {
        Some(text) => BoundaryData::parse_values(text).map_err(|e| usage(format!("--g: {e}")))?,
        None => vec![0.0; keys.len()],
    };
    if values.len() != keys.len() {
        return Err(usage(format!("--g has {} values for {} boundary vertices", values.len(), keys.len())));
    }
    Ok(BoundaryData::new(keys.into_iter().zip(values).collect())?)
}

fn write_out(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_build(a: BuildArgs) -> CmdResult {
    validate_graph(&a.graph)?;
    let g = build_prefractal(a.graph.dim, a.graph.level)?;
    let text = serde_json::to_string_pretty(&g.to_json()).map_err(Error::from)? + "\n";
    write_out(a.out.as_deref(), &text)
}

fn parse_eval(text: &str) -> Result<(usize, f64), Failure> {
    let bad = || usage(format!("--eval expects EDGE:S, got `{text}`"));
    let (e, s) = text.split_once(':').ok_or_else(bad)?;
    Ok((e.trim().parse().map_err(|_| bad())?, s.trim().parse().map_err(|_| bad())?))
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    validate_graph(&a.graph)?;
    let f = parse_field(&a.data.f)?;
    let gb = boundary_data(a.graph.dim, &a.data)?;
    let evals = a.eval.iter().map(|s| parse_eval(s)).collect::<Result<Vec<_>, _>>()?;
    if !evals.is_empty() && a.mode != Mode::Network {
        return Err(usage("--eval requires --mode network"));
    }
    let q = a.quad.config(a.graph.level);
    q.validate()?;
    let g = build_prefractal(a.graph.dim, a.graph.level)?;
    let opts = SolveOptions { strict: a.strict };
    let mut eval_lines = String::new();
    let sol: NodeSolution = match a.mode {
        Mode::Discrete => solve_discrete_with(&g, &f, &gb, opts)?,
        Mode::Network => {
            let net = solve_network_with(&g, &f, &gb, &q, opts)?;
            for (e, s) in evals {
                let v = net.eval_on_edge(&g, e, s)?;
                eval_lines.push_str(&format!("{e},{},{}\n", gasket_eikonal::io::fmt_real(s), gasket_eikonal::io::fmt_real(v)));
            }
            net.vertex_values
        }
        Mode::ValueIteration | Mode::BruteForce => {
            let checked = solve_discrete_with(&g, &f, &gb, opts)?;
            let mut sol = if a.mode == Mode::ValueIteration {
                value_iteration(&g, &f, &gb, 1e-13, 1_000_000)?.solution
            } else {
                brute_force_solution(&g, &f, &gb)?
            };
            sol.compat = checked.compat;
            sol.warnings = checked.warnings;
            sol
        }
    };
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    let csv = solution_csv(&g, &sol)?;
    if let Some(out) = &a.out {
        fs::write(out, &csv)?;
        let config = json!({
            "subcommand": "solve",
            "mode": a.mode.name(),
            "D": a.graph.dim,
            "level": a.graph.level,
            "f": a.data.f,
            "g": a.data.g,
            "g_expr": a.data.g_expr,
            "boundary": a.data.boundary,
            "strict": a.strict,
            "quadrature": q,
            "eval": a.eval,
        });
        let meta = SolutionMeta::new(&sol, &f.canonical(), &gb.describe(), config)?;
        fs::write(sidecar_path(out), meta.to_json()?)?;
    } else {
        write_out(None, &csv)?;
    }
    write_out(None, &eval_lines)
}

fn cmd_distance(a: DistanceArgs) -> CmdResult {
    validate_graph(&a.graph)?;
    let g = build_prefractal(a.graph.dim, a.graph.level)?;
    let from: PointSpec = a.from.parse()?;
    let to: PointSpec = a.to.parse()?;
    let d = geodesic_estimate(&g, &from.resolve(&g)?, &to.resolve(&g)?)?;
    println!("{:?} {} level {}", d.value, d.exactness, d.level_used);
    Ok(())
}

fn parse_levels(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || usage(format!("--levels expects `a..b` or a single level, got `{text}`"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (text, text),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_converge(a: ConvergeArgs) -> CmdResult {
    if a.dim == 0 {
        return Err(usage("dimension must be at least 1"));
    }
    let (lo, hi) = parse_levels(&a.levels)?;
    let f = parse_field(&a.data.f)?;
    let gb = boundary_data(a.dim, &a.data)?;
    let quadrature = if a.quad.is_default() {
        None
    } else {
        let q = a.quad.config(hi);
        q.validate()?;
        Some(q)
    };
    let opts = ConvergenceOptions {
        quadrature,
        lipschitz: a.lipschitz,
        repair: a.repair,
        strict: a.strict,
    };
    let table = run_levels(a.dim, &f, &gb, lo, hi, &opts)?;
    for w in &table.meta.warnings {
        eprintln!("warning: {w}");
    }
    write_out(a.out.as_deref(), &table.to_csv()?)
}

fn print_reports(title: &str, reports: &[VerifierReport]) {
    println!("{title}");
    for r in reports {
        println!("  {r}");
    }
}

fn cmd_check(a: CheckArgs) -> CmdResult {
    if let Some(count) = a.random {
        return check_random(&a, count);
    }
    let path = a.solution.as_ref().expect("clap requires --solution without --random");
    let file = SolutionFile::read(path)?;
    let meta: Option<SolutionMeta> = match fs::read_to_string(sidecar_path(path)) {
        Ok(text) => Some(serde_json::from_str(&text).map_err(|e| usage(format!("sidecar: {e}")))?),
        Err(_) => None,
    };
    let network = a.network || meta.as_ref().is_some_and(|m| m.convention == "edge_integral");
    let f = parse_field(&a.data.f)?;
    let gb = boundary_data(file.dim, &a.data)?;
    let g = build_prefractal(file.dim, file.level)?;
    let u = file.values_on(&g)?;
    let reports = if network {
        let q = a.quad.config(file.level);
        network_battery(&g, &f, &gb, &u, &q, a.tol)?
    } else {
        discrete_battery(&g, &f, &gb, &u, a.tol)?
    };
    print_reports(
        &format!(
            "{} (D={}, level {}, {} verifiers)",
            path.display(),
            file.dim,
            file.level,
            if network { "network" } else { "graph" }
        ),
        &reports,
    );
    verdict(&reports, a.strict)
}

fn verdict(reports: &[VerifierReport], strict: bool) -> CmdResult {
    let incompatible = reports.iter().any(|r| r.check.starts_with("compat") && !r.passed);
    if strict && incompatible {
        return Err(Failure {
            code: 2,
            message: "boundary data incompatible".into(),
        });
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.check.as_str()).collect();
    if failed.is_empty() {
        println!("all verifiers passed");
        Ok(())
    } else {
        Err(usage(format!("verifiers failed: {}", failed.join(", "))))
    }
}

fn check_random(a: &CheckArgs, count: usize) -> CmdResult {
    validate_graph(&a.graph)?;
    let g = build_prefractal(a.graph.dim, a.graph.level)?;
    let mut gen = InstanceGenerator::new(a.graph.dim, a.seed);
    let mut all = Vec::new();
    for i in 0..count {
        let inst = gen.instance(0.5, 1.5);
        let sol = solve_discrete_with(&g, &inst.f, &inst.gb, SolveOptions { strict: a.strict })?;
        let reports = discrete_battery(&g, &inst.f, &inst.gb, &sol.values, a.tol)?;
        print_reports(&format!("instance {i}: f = {}, g = {}", inst.f, inst.gb.describe()), &reports);
        all.extend(reports);
    }
    verdict(&all, a.strict)
}
