//! Experiment drivers behind the CLI subcommands: benchmark tables,
//! grid-refinement studies, single runs with field dumps, and config
//! inspection.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::config::{Config, SolverEntry};
use crate::error::{Error, Result};
use crate::estimate::{est_e_a, est_e_s};
use crate::fieldio::dump_field;
use crate::grid::{manufactured_heat_solution, GridSpec, InitKind};
use crate::hierarchy::kind_name;
use crate::report::{Method, RunReport, CSV_HEADER};
use crate::solver::{
    build_preconditioner, build_problem, crank_nicolson_run, BuiltPrecond, CnOptions,
    CnProblem, PrecondChoice,
};

pub const WORKERS_ENV: &str = "PARAHIF_WORKERS";

fn with_context(ctx: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
        Error::NotPositiveDefinite { index, value } => Error::Numerical(format!(
            "{ctx}: matrix not positive definite at pivot {index} ({value:e})"
        )),
        Error::Io(e) => Error::Numerical(format!("{ctx}: {e}")),
    }
}

fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let k: usize = v.trim().parse().map_err(|_| {
                Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))
            })?;
            if k == 0 {
                return Err(Error::Config(format!("{WORKERS_ENV} must be at least 1")));
            }
            Ok(k)
        }
        Err(_) => Ok(1),
    }
}

fn run_job(problem: &CnProblem, entry: &SolverEntry) -> Result<RunReport> {
    let (pre, factor_s) = build_preconditioner(problem, entry.choice)?;
    let opts = CnOptions { tol: entry.tol, maxit: entry.maxit, warm_start: entry.warm_start };
    let run = crank_nicolson_run(problem, &pre, &opts, |_, _| {})?;
    let (e_a, e_s) = match &pre {
        BuiltPrecond::Phif(f) => (
            Some(est_e_a(&problem.a, f, 1e-2, problem.spec.seed)?),
            Some(est_e_s(&problem.a, f, 1e-2, problem.spec.seed)?),
        ),
        _ => (None, None),
    };
    let (method, eps) = match entry.choice {
        PrecondChoice::Phif { eps } => (Method::Phif, Some(eps)),
        PrecondChoice::Ichol { droptol } => (Method::Ichol, Some(droptol)),
        PrecondChoice::None => (Method::None, None),
    };
    Ok(RunReport {
        problem: problem.spec.problem_id(),
        n_dofs: problem.grid.n_dofs(),
        method,
        eps,
        mem_bytes: pre.memory_bytes(),
        e_a,
        e_s,
        n_i_mean: run.mean_iterations,
        factor_s,
        solve_s: run.solve_seconds,
        warm_start: entry.warm_start,
        seed: problem.spec.seed,
    })
}

/// Runs every (problem, solver) pair and returns the rows in problem-major
/// order regardless of how many workers computed them.
pub fn bench_rows_with_workers(cfg: &Config, workers: usize) -> Result<Vec<RunReport>> {
    let mut problems = Vec::with_capacity(cfg.problems.len());
    for spec in &cfg.problems {
        problems
            .push(build_problem(spec).map_err(|e| with_context(&spec.problem_id(), e))?);
    }
    let njobs = problems.len() * cfg.solvers.len();
    let results: Mutex<Vec<Option<Result<RunReport>>>> =
        Mutex::new((0..njobs).map(|_| None).collect());
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(njobs.max(1)) {
            scope.spawn(|| loop {
                let job = next.fetch_add(1, Ordering::Relaxed);
                if job >= njobs {
                    break;
                }
                let problem = &problems[job / cfg.solvers.len()];
                let entry = &cfg.solvers[job % cfg.solvers.len()];
                let outcome = run_job(problem, entry).map_err(|e| {
                    let ctx =
                        format!("{} [{:?}]", problem.spec.problem_id(), entry.choice);
                    with_context(&ctx, e)
                });
                results.lock().unwrap()[job] = Some(outcome);
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every job slot filled"))
        .collect()
}

pub fn csv_text(rows: &[RunReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// The `bench` subcommand: all (problem, solver) pairs, CSV written to the
/// configured output directory.
pub fn run_bench(cfg: &Config) -> Result<(Vec<RunReport>, PathBuf)> {
    let rows = bench_rows_with_workers(cfg, worker_count()?)?;
    fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join(&cfg.output.report);
    fs::write(&path, csv_text(&rows))?;
    Ok((rows, path))
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    pub nsteps: usize,
    /// L-infinity error against the finest run restricted to this grid,
    /// relative to the restricted field's peak. Absent on the finest row.
    pub self_error: Option<f64>,
    /// L-infinity error against the separable exact solution, available when
    /// the coefficient is constant, the initial data is the sine product,
    /// and there is no reaction.
    pub exact_error: Option<f64>,
}

#[derive(Debug)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    pub self_slope: Option<f64>,
    pub exact_slope: Option<f64>,
}

pub const CONVERGENCE_HEADER: &str = "n,dt,nsteps,self_error,exact_error";

impl ConvergenceResult {
    pub fn csv_text(&self) -> String {
        let mut out = String::from(CONVERGENCE_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                r.dt,
                r.nsteps,
                opt(r.self_error),
                opt(r.exact_error)
            ));
        }
        if let Some(s) = self.self_slope {
            out.push_str(&format!("# self_slope {s}\n"));
        }
        if let Some(s) = self.exact_slope {
            out.push_str(&format!("# exact_slope {s}\n"));
        }
        out
    }
}

/// Least-squares slope of y against x.
fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Pointwise restriction of a fine-grid field to a coarser grid whose nodes
/// are a subset of the fine nodes.
fn restrict(fine: &[f64], fine_grid: &GridSpec, coarse_grid: &GridSpec) -> Vec<f64> {
    let r = fine_grid.n / coarse_grid.n;
    let mut out = vec![0.0; coarse_grid.n_dofs()];
    for (idx, v) in out.iter_mut().enumerate() {
        let c = coarse_grid.dof_coords(idx);
        let fine_coords = [c[0] * r, c[1] * r, c[2] * r];
        *v = fine[fine_grid.dof_index(fine_coords)];
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// The `converge` subcommand: rerun the base problem over the configured
/// grid sizes with the step count scaled to hold the final time fixed, then
/// compare runs pointwise against the finest (and against the exact solution
/// when one exists).
pub fn run_convergence(cfg: &Config) -> Result<ConvergenceResult> {
    let conv = cfg
        .convergence
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [convergence] section".into()))?;
    let ns = &conv.ns;
    if ns.len() < 3 {
        return Err(Error::Config(format!(
            "convergence needs at least 3 grid sizes, got {}",
            ns.len()
        )));
    }
    let base = &cfg.problems[0];
    let entry = &cfg.solvers[0];
    let finest = *ns.last().unwrap();
    for &n in ns.iter() {
        if finest % n != 0 {
            return Err(Error::Config(format!(
                "grid n = {n} does not divide the finest grid n = {finest}; \
                 pointwise restriction needs nested nodes"
            )));
        }
        if n % ns[0] != 0 {
            return Err(Error::Config(format!(
                "grid n = {n} is not a multiple of the coarsest n = {}; \
                 the step count cannot be scaled to a matching final time",
                ns[0]
            )));
        }
    }

    let has_exact = base.coeff.constant_value().is_some()
        && base.init == InitKind::SineProduct
        && base.reaction.is_none();

    let mut finals: Vec<(GridSpec, Vec<f64>)> = Vec::with_capacity(ns.len());
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns.iter() {
        let mut spec = base.clone();
        spec.grid = GridSpec::with_depth(base.grid.dim, n, base.grid.leaf)?;
        spec.nsteps = base.nsteps * (n / ns[0]);
        let ctx = format!("convergence n = {n}");
        let problem = build_problem(&spec).map_err(|e| with_context(&ctx, e))?;
        let (pre, _) = build_preconditioner(&problem, entry.choice)
            .map_err(|e| with_context(&ctx, e))?;
        let opts =
            CnOptions { tol: entry.tol, maxit: entry.maxit, warm_start: entry.warm_start };
        let run = crank_nicolson_run(&problem, &pre, &opts, |_, _| {})
            .map_err(|e| with_context(&ctx, e))?;
        let t_final = spec.nsteps as f64 * spec.dt();
        let exact_error = if has_exact {
            let exact = manufactured_heat_solution(&spec.grid, &spec.coeff, t_final)?;
            let scale = max_abs(&exact);
            let diff = run
                .u
                .iter()
                .zip(&exact)
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
            Some(diff / scale)
        } else {
            None
        };
        rows.push(ConvergenceRow {
            n,
            dt: spec.dt(),
            nsteps: spec.nsteps,
            self_error: None,
            exact_error,
        });
        finals.push((spec.grid, run.u));
    }

    let (fine_grid, fine_u) = finals.last().unwrap().clone();
    for (i, (grid, u)) in finals.iter().enumerate() {
        if i + 1 == finals.len() {
            continue;
        }
        let restricted = restrict(&fine_u, &fine_grid, grid);
        let scale = max_abs(&restricted);
        let diff =
            u.iter().zip(&restricted).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        rows[i].self_error = Some(if scale == 0.0 { 0.0 } else { diff / scale });
    }

    let log_points = |vals: Vec<(usize, f64)>| -> Vec<(f64, f64)> {
        vals.into_iter()
            .filter(|&(_, e)| e > 0.0)
            .map(|(n, e)| ((1.0 / n as f64).ln(), e.ln()))
            .collect()
    };
    let self_slope = fit_slope(&log_points(
        rows.iter().filter_map(|r| r.self_error.map(|e| (r.n, e))).collect(),
    ));
    let exact_slope = fit_slope(&log_points(
        rows.iter().filter_map(|r| r.exact_error.map(|e| (r.n, e))).collect(),
    ));
    Ok(ConvergenceResult { rows, self_slope, exact_slope })
}

pub fn write_convergence(cfg: &Config) -> Result<(ConvergenceResult, PathBuf)> {
    let result = run_convergence(cfg)?;
    fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join(&cfg.output.report);
    fs::write(&path, result.csv_text())?;
    Ok((result, path))
}

/// Stdlib-only companion script for turning raw dumps into plotting-ready
/// CSV; written next to the dumps so the artifact stays self-contained.
const FIELD_TO_CSV: &str = r#"#!/usr/bin/env python3
"""Convert raw field dumps (little-endian float64 plus .txt sidecar) to CSV."""
import csv
import struct
import sys
from pathlib import Path


def convert(path):
    raw = Path(path)
    meta = {}
    for line in (raw.parent / (raw.name + ".txt")).read_text().splitlines():
        key, _, value = line.partition(" ")
        meta[key] = value
    dim, n = int(meta["dimension"]), int(meta["n"])
    m = n - 1
    values = struct.unpack("<%dd" % m**dim, raw.read_bytes())
    out = raw.parent / (raw.name + ".csv")
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z"][:dim] + ["u"])
        for flat, u in enumerate(values):
            coords, rest = [], flat
            for _ in range(dim):
                coords.append((rest % m + 1) / n)
                rest //= m
            writer.writerow(coords + [u])
    print(out)


if __name__ == "__main__":
    for arg in sys.argv[1:]:
        convert(arg)
"#;

/// The `solve` subcommand: one problem, one solver, field dumps along the
/// way, and a one-row report.
pub fn run_solve(cfg: &Config) -> Result<(RunReport, PathBuf)> {
    let spec = &cfg.problems[0];
    let entry = &cfg.solvers[0];
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("field_to_csv.py"), FIELD_TO_CSV)?;

    let ctx = spec.problem_id();
    let problem = build_problem(spec).map_err(|e| with_context(&ctx, e))?;
    let (pre, factor_s) =
        build_preconditioner(&problem, entry.choice).map_err(|e| with_context(&ctx, e))?;
    let opts = CnOptions { tol: entry.tol, maxit: entry.maxit, warm_start: entry.warm_start };

    let dt = spec.dt();
    let dump = |step: usize, u: &[f64]| -> Result<()> {
        let path = dir.join(format!("u_step{step:06}.f64"));
        dump_field(u, &problem.grid, step as f64 * dt, &path)
    };
    dump(0, &problem.u0)?;
    let every = cfg.output.dump_every;
    let mut dump_err = None;
    let mut last_dumped = 0;
    let run = crank_nicolson_run(&problem, &pre, &opts, |step, u| {
        let wanted = (every > 0 && step % every == 0) || step == spec.nsteps;
        if wanted && dump_err.is_none() {
            if let Err(e) = dump(step, u) {
                dump_err = Some(e);
            } else {
                last_dumped = step;
            }
        }
    })
    .map_err(|e| with_context(&ctx, e))?;
    if let Some(e) = dump_err {
        return Err(e);
    }
    debug_assert_eq!(last_dumped, spec.nsteps);

    let (e_a, e_s) = match &pre {
        BuiltPrecond::Phif(f) => (
            Some(est_e_a(&problem.a, f, 1e-2, spec.seed)?),
            Some(est_e_s(&problem.a, f, 1e-2, spec.seed)?),
        ),
        _ => (None, None),
    };
    let (method, eps) = match entry.choice {
        PrecondChoice::Phif { eps } => (Method::Phif, Some(eps)),
        PrecondChoice::Ichol { droptol } => (Method::Ichol, Some(droptol)),
        PrecondChoice::None => (Method::None, None),
    };
    let report = RunReport {
        problem: spec.problem_id(),
        n_dofs: problem.grid.n_dofs(),
        method,
        eps,
        mem_bytes: pre.memory_bytes(),
        e_a,
        e_s,
        n_i_mean: run.mean_iterations,
        factor_s,
        solve_s: run.solve_seconds,
        warm_start: entry.warm_start,
        seed: spec.seed,
    };
    let path = dir.join(&cfg.output.report);
    fs::write(&path, csv_text(std::slice::from_ref(&report)))?;
    Ok((report, path))
}

/// The `info` subcommand: parsed specs plus derived quantities, no solves.
pub fn run_info(cfg: &Config) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for spec in &cfg.problems {
        let g = &spec.grid;
        writeln!(out, "problem {}", spec.problem_id()).unwrap();
        writeln!(
            out,
            "  grid: dim {} n {} leaf {} levels {} ({} dofs, h = {})",
            g.dim,
            g.n,
            g.leaf,
            g.levels,
            g.n_dofs(),
            g.h()
        )
        .unwrap();
        writeln!(
            out,
            "  time: dt {} ({} steps, t_final {})",
            spec.dt(),
            spec.nsteps,
            spec.nsteps as f64 * spec.dt()
        )
        .unwrap();
        writeln!(out, "  seed {}", spec.seed).unwrap();
        writeln!(out, "  coeff {:?}", spec.coeff).unwrap();
        writeln!(out, "  init {:?}", spec.init).unwrap();
        match spec.reaction {
            Some(re) => writeln!(out, "  reaction k1 {} k2 {}", re.k1, re.k2).unwrap(),
            None => writeln!(out, "  reaction none").unwrap(),
        }
        let hier = crate::hierarchy::build_hierarchy(g);
        for (ell, groups) in hier.levels.iter().enumerate() {
            writeln!(
                out,
                "  level {ell}: {} {}s, {} {}s, {} {}s{}",
                groups.interiors.len(),
                kind_name(g.dim, 0),
                groups.codim1.len(),
                kind_name(g.dim, 1),
                groups.corners.len(),
                kind_name(g.dim, g.dim),
                if g.dim == 3 {
                    format!(", {} {}s", groups.codim2.len(), kind_name(3, 2))
                } else {
                    String::new()
                }
            )
            .unwrap();
        }
    }
    for entry in &cfg.solvers {
        writeln!(
            out,
            "solver {:?}: tol {} maxit {} warm_start {}",
            entry.choice, entry.tol, entry.maxit, entry.warm_start
        )
        .unwrap();
    }
    writeln!(
        out,
        "output dir {} report {} dump_every {}",
        cfg.output.dir.display(),
        cfg.output.report,
        cfg.output.dump_every
    )
    .unwrap();
    if let Some(conv) = &cfg.convergence {
        writeln!(out, "convergence ns {:?}", conv.ns).unwrap();
    }
    out
}
