//! End-to-end checks of the command line binary: subcommand behavior, exit
//! codes, and cross-process determinism of the emitted artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn parahif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parahif"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// CSV rows with the two wall-time fields blanked, for bitwise comparison
/// across runs.
fn untimed(csv: &str) -> String {
    let mut out = String::new();
    for line in csv.lines() {
        let mut fields: Vec<&str> = line.split(',').collect();
        if fields.len() == 12 && fields[0] != "problem" {
            fields[8] = "";
            fields[9] = "";
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bench_is_deterministic_across_processes_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "bench.cfg",
        &format!(
            "[problem]\nkind = heat2d\nn = 32\nnsteps = 3\n\n\
             [solver]\nprecond = phif\neps = 1e-3\n\n\
             [solver]\nprecond = ichol\neps = 1e-3\n\n\
             [output]\ndir = {}\n",
            tmp.path().join("out").display()
        ),
    );

    let first = parahif(&["bench", &cfg]);
    assert!(first.status.success(), "bench failed: {}", stderr(&first));
    let second = Command::new(env!("CARGO_BIN_EXE_parahif"))
        .args(["bench", &cfg])
        .env("PARAHIF_WORKERS", "2")
        .output()
        .unwrap();
    assert!(second.status.success());

    let a = untimed(&stdout(&first));
    let b = untimed(&stdout(&second));
    assert_eq!(a, b, "rows differ across processes/worker counts");
    assert!(a.starts_with("problem,N,method,eps,mem_bytes,"), "unexpected header: {a}");
    assert_eq!(a.lines().count(), 3, "one header plus one row per (problem, solver)");

    let report = std::fs::read_to_string(tmp.path().join("out/report.csv")).unwrap();
    assert_eq!(untimed(&report), b, "written report diverges from stdout");
}

#[test]
fn solve_dumps_identical_fields_on_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = tmp.path().join(sub);
        let cfg = write_cfg(
            tmp.path(),
            &format!("solve_{sub}.cfg"),
            &format!(
                "[problem]\nkind = logistic2d\nn = 32\nnsteps = 4\n\n\
                 [solver]\nprecond = phif\neps = 1e-3\n\n\
                 [output]\ndir = {}\ndump_every = 2\n",
                out_dir.display()
            ),
        );
        let out = parahif(&["solve", &cfg]);
        assert!(out.status.success(), "solve failed: {}", stderr(&out));
        dirs.push(out_dir);
    }
    for name in ["u_step000000.f64", "u_step000002.f64", "u_step000004.f64"] {
        let a = std::fs::read(dirs[0].join(name)).expect(name);
        let b = std::fs::read(dirs[1].join(name)).expect(name);
        assert_eq!(a, b, "{name} differs between reruns");
        assert!(!a.is_empty() && a.len() % 8 == 0);
    }
    assert!(dirs[0].join("field_to_csv.py").exists(), "companion plotting script missing");
}

#[test]
fn converge_reports_slopes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "conv.cfg",
        &format!(
            "[problem]\nkind = heat2d\nn = 16\nnsteps = 4\ncoeff.constant = 1\n\
             init.kind = sine_product\n\n[solver]\nprecond = phif\neps = 1e-9\n\n\
             [convergence]\nns = 16, 32, 64\n\n[output]\ndir = {}\n",
            tmp.path().join("out").display()
        ),
    );
    let out = parahif(&["converge", &cfg]);
    assert!(out.status.success(), "converge failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("n,dt,nsteps,self_error,exact_error"));
    assert!(text.contains("# exact_slope"), "missing slope summary: {text}");
}

#[test]
fn info_describes_the_parsed_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "info.cfg",
        "[problem]\nkind = heat3d\nn = 16\nnsteps = 5\n\n[solver]\nprecond = phif\neps = 1e-3, 1e-6\n",
    );
    let out = parahif(&["info", &cfg]);
    assert!(out.status.success());
    let text = stdout(&out).to_lowercase();
    assert!(text.contains("heat3d"), "{text}");
    assert!(text.contains("16"), "{text}");
    assert!(text.contains("phif"), "{text}");
}

#[test]
fn config_errors_exit_with_code_1() {
    let missing = parahif(&["bench", "/nonexistent/path.cfg"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!stderr(&missing).is_empty());

    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "bad.cfg", "[problem]\nkind = heat2d\nn = 32\nbogus = 1\n");
    let bad = parahif(&["bench", &cfg]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("line 4"), "error should cite the line: {}", stderr(&bad));
}

#[test]
fn numerical_failure_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    // an unpreconditioned solve cannot reach 1e-12 in one iteration
    let cfg = write_cfg(
        tmp.path(),
        "stall.cfg",
        &format!(
            "[problem]\nkind = heat2d\nn = 32\nnsteps = 2\n\n\
             [solver]\nprecond = none\nmaxit = 1\n\n[output]\ndir = {}\n",
            tmp.path().join("out").display()
        ),
    );
    let out = parahif(&["bench", &cfg]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error"), "{}", stderr(&out));
}
