use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gasket-eikonal"))
        .args(args)
        .env_remove("GASKET_CELL_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `(p, q, value)` per data row of a solution CSV.
fn rows(csv: &str) -> Vec<(u64, u64, f64)> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[2].parse().unwrap(), c[3].parse().unwrap(), c[6].parse().unwrap())
        })
        .collect()
}

fn graph_json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn build_counts() {
    let g = graph_json(&["build", "-D", "2", "-n", "2"]);
    assert_eq!(g["vertices"].as_array().unwrap().len(), 15);
    assert_eq!(g["edges"].as_array().unwrap().len(), 27);
    assert_eq!(g["D"], 2);
    assert_eq!(g["h"], 0.25);

    let g = graph_json(&["build", "-D", "2", "-n", "0"]);
    assert_eq!(g["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(g["boundary"].as_array().unwrap().len(), 3);

    let g = graph_json(&["build", "-D", "1", "-n", "3"]);
    assert_eq!(g["vertices"].as_array().unwrap().len(), 9);
    assert_eq!(g["edges"].as_array().unwrap().len(), 8);
    for v in g["vertices"].as_array().unwrap() {
        assert_eq!(v["coords"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn build_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let o = run(&["build", "-n", "3", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(g["vertices"].as_array().unwrap().len(), 42);
}

#[test]
fn solve_discrete_level_one() {
    let o = run(&["solve", "--mode", "discrete", "-n", "1", "--f", "1", "--g", "0,0,0"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("id,level,p,q,x,y,value\n"));
    for (p, q, v) in rows(&csv) {
        let corner = (p, q) == (0, 0) || (p, q) == (2, 0) || (p, q) == (0, 2);
        assert_eq!(v, if corner { 0.0 } else { 0.5 });
    }
}

#[test]
fn solve_network_interval() {
    let o = run(&["solve", "--mode", "network", "-D", "1", "-n", "4", "--f", "1+x", "--g", "0,0"]);
    assert!(o.status.success());
    let mid = rows(&stdout(&o)).into_iter().find(|r| r.0 == 8).unwrap();
    assert!((mid.2 - 0.625).abs() < 1e-14);
}

#[test]
fn solve_network_eval_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.csv");
    let o = run(&["solve", "--mode", "network", "-n", "2", "-o", out.to_str().unwrap(), "--eval", "0:0.125", "--eval", "1:0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("0,1.2500000000000000e-1,"));
    let o = run(&["solve", "--mode", "discrete", "-n", "2", "--eval", "0:0.1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn strict_incompatible_exits_two() {
    let o = run(&["solve", "--mode", "discrete", "-n", "2", "--f", "1", "--g", "0,2,0", "--strict"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("0:1,0") && err.contains("0:0,0"), "{err}");
    let o = run(&["solve", "--mode", "network", "-n", "2", "--f", "1", "--g", "0,2,0", "--strict"]);
    assert_eq!(o.status.code(), Some(2));

    let lenient = run(&["solve", "-n", "2", "--f", "1", "--g", "0,2,0"]);
    assert!(lenient.status.success());
    assert!(stderr(&lenient).contains("warning"));
}

#[test]
fn distance_between_corners() {
    let o = run(&["distance", "--from", "a1", "--to", "a2", "-n", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.0 exact-at-vertices level 5");
    let o = run(&["distance", "--from", "a1", "--to", "1:1,1", "-n", "6"]);
    assert_eq!(stdout(&o).trim(), "1.0 exact-at-vertices level 6");
    let o = run(&["distance", "--from", "a1", "--to", "edge:0:0.01", "-n", "3"]);
    assert!(stdout(&o).contains("upper-estimate"));
    let o = run(&["distance", "--from", "a7", "--to", "a1", "-n", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn converge_constant_field_is_exact() {
    let o = run(&["converge", "--f", "1", "--g", "0,0,0", "--levels", "1..6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# meta: {"));
    lines.next();
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), 6);
    for row in data {
        let c: Vec<&str> = row.split(',').collect();
        assert_eq!(c[2].parse::<f64>().unwrap(), 0.0);
        for cell in [c[3], c[4], c[5]] {
            assert!(cell.is_empty() || cell.parse::<f64>().unwrap() == 0.0);
        }
    }
}

#[test]
fn converge_writes_file_and_reports_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&["converge", "--f", "1+x", "--levels", "2..6", "--lipschitz", "1", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let last = text.lines().last().unwrap();
    let rate: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!(rate >= 0.5);
    assert!(text.contains("\"omega_source\":\"lipschitz(L=1)\""));
}

fn solve_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let out = dir.join(name);
    let mut full = vec!["solve"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", out.to_str().unwrap()]);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    out.to_str().unwrap().to_string()
}

#[test]
fn check_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let sol = solve_to(dir.path(), "sol.csv", &["-n", "3", "--f", "1", "--g", "0,0,0"]);
    assert!(Path::new(&format!("{sol}.meta.json")).exists());
    let o = run(&["check", "--solution", &sol, "--f", "1", "--g", "0,0,0"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let table = stdout(&o);
    for name in ["subsolution", "supersolution", "kruzkov_residual", "barrier_bound", "adjacency_bound", "compat_discrete"] {
        assert!(table.contains(name), "{table}");
    }
    assert!(!table.contains("FAIL"));

    let net = solve_to(dir.path(), "net.csv", &["--mode", "network", "-n", "4", "--f", "2 - x*y", "--g", "0,0.1,0"]);
    let o = run(&["check", "--solution", &net, "--f", "2 - x*y", "--g", "0,0.1,0"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("network_equation"));
}

#[test]
fn check_detects_wrong_data() {
    let dir = tempfile::tempdir().unwrap();
    let sol = solve_to(dir.path(), "sol.csv", &["-n", "3", "--f", "1"]);
    let o = run(&["check", "--solution", &sol, "--f", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    let text = std::fs::read_to_string(&sol).unwrap();
    let tampered: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 9 {
                let mut c: Vec<String> = l.split(',').map(String::from).collect();
                c[6] = "9.0".into();
                c.join(",")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&sol, tampered).unwrap();
    let o = run(&["check", "--solution", &sol, "--f", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["check", "--solution", &sol, "--f", "1", "--g", "0,2,0", "--strict"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_random_instances() {
    let a = run(&["check", "--random", "3", "--seed", "9", "-n", "3"]);
    assert!(a.status.success(), "{}", stdout(&a));
    let b = run(&["check", "--random", "3", "--seed", "9", "-n", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).matches("instance").count(), 3);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--mode", "network", "-n", "5", "--f", "1 + 0.5*sin(3*x)"];
    let a = solve_to(dir.path(), "a.csv", &args);
    let b = solve_to(dir.path(), "b.csv", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(format!("{a}.meta.json")).unwrap(), std::fs::read(format!("{b}.meta.json")).unwrap());
    let c1 = run(&["converge", "--f", "1+x*y", "--levels", "1..5"]);
    let c2 = run(&["converge", "--f", "1+x*y", "--levels", "1..5"]);
    assert_eq!(c1.stdout, c2.stdout);
}

#[test]
fn boundary_override() {
    let o = run(&["solve", "-n", "3", "--boundary", "1:1,0;1:0,1", "--g", "0,0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    let at = |p, q| r.iter().find(|x| x.0 == p && x.1 == q).unwrap().2;
    assert_eq!(at(4, 0), 0.0);
    assert_eq!(at(0, 4), 0.25);
    assert_eq!(at(0, 0), 0.5);
    let o = run(&["solve", "-n", "3", "--g-expr", "x", "--boundary", "1:1,0;1:0,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["solve", "-n", "3", "--boundary", "1:1,0", "--g", "0,0.25"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["solve", "-n", "0", "--boundary", "1:1,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--f", "x +"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "-n", "2", "--f", "x - 0.5"]).status.code(), Some(1));
    assert_eq!(run(&["build", "-D", "0"]).status.code(), Some(1));
    assert_eq!(run(&["converge", "--levels", "5..2"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "-n", "4", "--mode", "brute-force"]).status.code(), Some(3));
    assert_eq!(run(&["solve", "-n", "3", "--panels", "3"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_gasket-eikonal"))
        .args(["build", "-n", "6"])
        .env("GASKET_CELL_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
