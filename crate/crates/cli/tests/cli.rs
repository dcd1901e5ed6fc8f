use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn edo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edo"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .env_remove("RUST_LIB_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = edo(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails_with(args: &[&str], needle: &str) {
    let out = edo(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(needle), "{args:?}: '{err}' lacks '{needle}'");
}

fn csv_column(text: &str, column: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn run_is_deterministic_and_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let base = ["run", "--synthetic-n", "10", "--mu", "3", "--seed", "4", "--out"];
    let out_a = ok(&[&base[..], &[a.to_str().unwrap()]].concat());
    let out_b = ok(&[&base[..], &[b.to_str().unwrap()]].concat());
    assert_eq!(out_a, out_b);
    for name in ["trajectory.csv", "summary.csv", "final_population.txt"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    // 3 ≤ n, so the count measure reaches its optimum d_P = 1 before the budget
    assert_eq!(csv_column(&out_a, "d_p"), vec!["1"]);
    let stop: u64 = csv_column(&out_a, "termination_iteration")[0].parse().unwrap();
    assert!(stop > 0 && stop <= 300);
    let iterations = csv_column(&read(&a, "trajectory.csv"), "iteration");
    assert_eq!(iterations.first().unwrap(), "0");
    assert_eq!(iterations.last().unwrap(), &stop.to_string());
}

#[test]
fn invalid_runs_are_rejected() {
    fails_with(&["run", "--synthetic-n", "10", "--mu", "3", "--alpha", "0.1"], "optimum unknown");
    fails_with(&["run", "--synthetic-n", "8", "--mu", "1"], "too small");
    fails_with(&["run", "--mu", "3"], "exactly one");
    fails_with(&["run", "--synthetic-n", "8", "--mu", "3", "--operator", "exchange"], "mismatch");
    fails_with(&["experiment-unconstrained", "--synthetic-n", "6", "--mu", "1", "--reps", "1", "--out", "/nonexistent/x"], "too small");
}

#[test]
fn tour_runs_use_unit_distances() {
    let out = ok(&[
        "run", "--synthetic-n", "9", "--problem", "stsp", "--mu", "3", "--alpha", "0",
        "--init", "opt", "--budget", "400", "--no-early-stop",
    ]);
    // every tour costs n, so the threshold accepts every offspring
    assert_eq!(csv_column(&out, "evaluations"), vec!["400"]);
    assert_eq!(csv_column(&out, "problem"), vec!["STSP"]);
}

#[test]
fn construct_then_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let pop = tmp.path().join("max.pop");
    ok(&["construct", "qap-max", "--n", "6", "--mu", "8", "--out", pop.to_str().unwrap()]);
    let report = ok(&["verify", "--population", pop.to_str().unwrap(), "--operator", "2opt", "--measure", "n"]);
    assert!(report.contains("spread\t1"), "{report}");
    assert!(report.contains("no improving move"), "{report}");

    let trap = tmp.path().join("trap.pop");
    ok(&["construct", "qap-trap", "--n", "7", "--out", trap.to_str().unwrap()]);
    let report = ok(&["verify", "--population", trap.to_str().unwrap(), "--operator", "2opt", "--measure", "n"]);
    assert!(report.contains("max_count\t2"), "{report}");
    assert!(report.contains("no improving move"), "{report}");

    let dup = tmp.path().join("dup.pop");
    fs::write(&dup, "6 2 QAP\n1 2 3 4 5 6\n1 2 3 4 5 6\n").unwrap();
    let report = ok(&["verify", "--population", dup.to_str().unwrap(), "--operator", "2opt"]);
    assert_eq!(report.matches("improving move:").count(), 2, "{report}");
    fails_with(&["construct", "qap-max", "--n", "6"], "--mu");
}

#[test]
fn bounds_table_matches_closed_form() {
    let out = ok(&["bounds", "--operator", "2opt", "--problem", "stsp", "--n", "10", "--mu", "3"]);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0], ["problem", "operator", "n", "mu", "d_p", "bound"]);
    assert_eq!(rows.len(), 3);
    // 2[(n-1)(d-2)+1] / (μ n (n-3)) at n = 10, μ = 3
    for (row, d) in rows[1..].iter().zip([2.0, 3.0]) {
        let expected = 2.0 * (9.0 * (d - 2.0) + 1.0) / (3.0 * 10.0 * 7.0);
        let got: f64 = row[5].parse().unwrap();
        assert!((got - expected).abs() < 1e-12, "{row:?}");
    }
    let out = ok(&["bounds", "--operator", "2opt,3opt,4opt", "--n", "30", "--mu", "5"]);
    assert_eq!(out.lines().count(), 1 + 3 * 4);
    fails_with(&["bounds", "--operator", "2opt", "--problem", "stsp", "--n", "10", "--mu", "9"], "range");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# manifest\nsynthetic-n = 8\nmu = 4\nmeasure = d\nseed = 3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = ok(&["run", "--config", c]);
    assert_eq!(csv_column(&from_file, "mu"), vec!["4"]);
    assert_eq!(csv_column(&from_file, "measure"), vec!["d"]);
    let overridden = ok(&["run", "--config", c, "--mu", "5"]);
    assert_eq!(csv_column(&overridden, "mu"), vec!["5"]);
    assert_eq!(ok(&["--config", c, "run"]), from_file);

    fs::write(&cfg, "mu 4\n").unwrap();
    fails_with(&["run", "--config", c], "key = value");
}

#[test]
fn experiment_drivers_write_their_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("u");
    ok(&[
        "experiment-unconstrained", "--synthetic-n", "6", "--mu", "2,3", "--reps", "2",
        "--checkpoints", "5", "--out", dir.to_str().unwrap(),
    ]);
    for f in ["summary.csv", "trajectories.csv", "termination.csv", "aggregate.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    assert_eq!(read(&dir, "summary.csv").lines().count(), 1 + 2 * 2 * 2);

    let dir = tmp.path().join("h");
    ok(&[
        "experiment-heatmap", "--synthetic-n", "8", "--mu", "2:4:2", "--operator", "2opt,kopt:n/5",
        "--reps", "2", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(read(&dir, "heatmap.csv").lines().count(), 1 + 2 * 2);

    // a solved instance: all-zero flows make every assignment optimal
    let dat = tmp.path().join("toy.dat");
    let zeros = "0 0 0 0 0\n".repeat(5);
    fs::write(&dat, format!("5\n\n{zeros}\n{zeros}")).unwrap();
    fs::write(tmp.path().join("toy.sln"), "5 0\n1 2 3 4 5\n").unwrap();
    let dir = tmp.path().join("c");
    ok(&[
        "experiment-constrained", "--instance", dat.to_str().unwrap(), "--mu", "3", "--alpha", "0,0.5",
        "--reps", "2", "--budget", "200", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(read(&dir, "constrained_runs.csv").lines().count(), 1 + 2 * 2 * 2);
}
