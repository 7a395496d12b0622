//! Conjugate gradient, its preconditioned form, and the Crank-Nicolson time
//! stepper that the benchmarks drive.

use std::time::Instant;

use crate::dense::{axpy, dot, norm2};
use crate::error::{Error, Result};
use crate::grid::{
    build_cn_pair, build_stiffness, initial_condition, sample_coeff, GridSpec, ProblemSpec,
};
use crate::hierarchy::{build_hierarchy, DofHierarchy};
use crate::hif::{factorize, HifFactor};
use crate::ichol::{ichol_droptol, IncompleteCholesky};
use crate::sparse::SymSparse;

/// Symmetric positive definite preconditioner application `z = P^{-1} r`.
pub trait Precond {
    fn solve_into(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPrecond;

impl Precond for IdentityPrecond {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl Precond for HifFactor {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.apply_inverse(z);
    }
}

impl Precond for IncompleteCholesky {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve(z);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub converged: bool,
    pub final_relres: f64,
}

/// Preconditioned conjugate gradient on the true residual: convergence means
/// `||b - A x|| / ||b|| <= tol`, verified against a freshly computed
/// residual, with the recurrence residual also replaced every 50 iterations
/// to guard against drift. `x` carries the initial guess in and the solution
/// out. Hitting `maxit` is reported, not an error.
pub fn pcg(
    a: &SymSparse,
    b: &[f64],
    x: &mut [f64],
    precond: &dyn Precond,
    tol: f64,
    maxit: usize,
) -> Result<SolveStats> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);

    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats { iterations: 0, converged: true, final_relres: 0.0 });
    }

    let exact_residual = |x: &[f64], r: &mut Vec<f64>, q: &mut Vec<f64>| {
        a.spmv(x, q);
        r.clear();
        r.extend(b.iter().zip(q.iter()).map(|(bi, qi)| bi - qi));
    };

    let mut r = vec![0.0; n];
    let mut q = vec![0.0; n];
    exact_residual(x, &mut r, &mut q);
    let mut relres = norm2(&r) / bnorm;
    if !relres.is_finite() {
        return Err(Error::Numerical("pcg: non-finite initial residual".into()));
    }
    if relres <= tol {
        return Ok(SolveStats { iterations: 0, converged: true, final_relres: relres });
    }

    let mut z = vec![0.0; n];
    precond.solve_into(&r, &mut z);
    let mut rz = dot(&r, &z);
    if rz <= 0.0 || !rz.is_finite() {
        return Err(Error::Numerical(format!(
            "pcg: preconditioner is not positive definite (r'z = {rz:e})"
        )));
    }
    let mut p = z.clone();

    for it in 1..=maxit {
        a.spmv(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 || !pq.is_finite() {
            return Err(Error::Numerical(format!(
                "pcg: matrix is not positive definite (p'Ap = {pq:e})"
            )));
        }
        let alpha = rz / pq;
        axpy(x, alpha, &p);
        axpy(&mut r, -alpha, &q);
        relres = norm2(&r) / bnorm;
        if !relres.is_finite() {
            return Err(Error::Numerical(format!("pcg: residual diverged at iteration {it}")));
        }

        if relres <= tol {
            // apparent convergence: accept only on the true residual
            exact_residual(x, &mut r, &mut q);
            relres = norm2(&r) / bnorm;
            if relres <= tol {
                return Ok(SolveStats { iterations: it, converged: true, final_relres: relres });
            }
        } else if it % 50 == 0 {
            exact_residual(x, &mut r, &mut q);
            relres = norm2(&r) / bnorm;
        }

        precond.solve_into(&r, &mut z);
        let rz_new = dot(&r, &z);
        if rz_new <= 0.0 || !rz_new.is_finite() {
            return Err(Error::Numerical(format!(
                "pcg: preconditioner is not positive definite (r'z = {rz_new:e})"
            )));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok(SolveStats { iterations: maxit, converged: false, final_relres: relres })
}

/// Unpreconditioned conjugate gradient.
pub fn cg(a: &SymSparse, b: &[f64], x: &mut [f64], tol: f64, maxit: usize) -> Result<SolveStats> {
    pcg(a, b, x, &IdentityPrecond, tol, maxit)
}

/// One benchmark problem, fully assembled: the stiffness matrix `M`, the
/// Crank-Nicolson pair `A = I - dt/2 M`, `B = I + dt/2 M`, the initial data,
/// and the DOF hierarchy the multilevel factorization runs on.
pub struct CnProblem {
    pub spec: ProblemSpec,
    pub grid: GridSpec,
    pub stiffness: SymSparse,
    pub a: SymSparse,
    pub b: SymSparse,
    pub u0: Vec<f64>,
    pub hier: DofHierarchy,
    /// Coefficient samples at the interior nodes, for field dumps.
    pub coeff_nodes: Vec<f64>,
}

pub fn build_problem(spec: &ProblemSpec) -> Result<CnProblem> {
    let grid = spec.grid;
    let coeff = sample_coeff(&spec.coeff, &grid, spec.seed);
    let stiffness = build_stiffness(&grid, &coeff)?;
    let (a, b) = build_cn_pair(&stiffness, spec.dt());
    let u0 = initial_condition(&spec.init, &grid);
    let hier = build_hierarchy(&grid);
    Ok(CnProblem {
        spec: spec.clone(),
        grid,
        stiffness,
        a,
        b,
        u0,
        hier,
        coeff_nodes: coeff.node.clone(),
    })
}

/// Which preconditioner a run uses; `eps` doubles as the incomplete
/// Cholesky drop tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecondChoice {
    Phif { eps: f64 },
    Ichol { droptol: f64 },
    None,
}

pub enum BuiltPrecond {
    Phif(HifFactor),
    Ichol(IncompleteCholesky),
    Identity,
}

impl BuiltPrecond {
    pub fn memory_bytes(&self) -> usize {
        match self {
            BuiltPrecond::Phif(f) => f.memory_bytes(),
            BuiltPrecond::Ichol(f) => f.memory_bytes(),
            BuiltPrecond::Identity => 0,
        }
    }

    pub fn phif(&self) -> Option<&HifFactor> {
        match self {
            BuiltPrecond::Phif(f) => Some(f),
            _ => None,
        }
    }
}

impl Precond for BuiltPrecond {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        match self {
            BuiltPrecond::Phif(f) => f.solve_into(r, z),
            BuiltPrecond::Ichol(f) => f.solve_into(r, z),
            BuiltPrecond::Identity => z.copy_from_slice(r),
        }
    }
}

/// Builds the chosen preconditioner for `A`, returning it with the wall time
/// spent factorizing.
pub fn build_preconditioner(
    problem: &CnProblem,
    choice: PrecondChoice,
) -> Result<(BuiltPrecond, f64)> {
    let start = Instant::now();
    let built = match choice {
        PrecondChoice::Phif { eps } => {
            BuiltPrecond::Phif(factorize(&problem.a, &problem.hier, eps)?)
        }
        PrecondChoice::Ichol { droptol } => {
            BuiltPrecond::Ichol(ichol_droptol(&problem.a, droptol)?)
        }
        PrecondChoice::None => BuiltPrecond::Identity,
    };
    Ok((built, start.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, Copy)]
pub struct CnOptions {
    pub tol: f64,
    pub maxit: usize,
    /// Start each step's PCG from the previous solution instead of zero.
    pub warm_start: bool,
}

impl Default for CnOptions {
    fn default() -> Self {
        CnOptions { tol: 1e-12, maxit: 1000, warm_start: true }
    }
}

pub struct CnRunResult {
    pub u: Vec<f64>,
    pub iterations: Vec<usize>,
    pub mean_iterations: f64,
    pub solve_seconds: f64,
}

/// Runs `nsteps` of Crank-Nicolson: `A u^k = B u^{k-1} + dt r(u^{k-1})` with
/// the reaction handled explicitly. The factorization is reused across all
/// steps. `on_step` sees every accepted state, 1-based.
pub fn crank_nicolson_run(
    problem: &CnProblem,
    precond: &BuiltPrecond,
    opts: &CnOptions,
    mut on_step: impl FnMut(usize, &[f64]),
) -> Result<CnRunResult> {
    let n = problem.a.dim();
    let dt = problem.spec.dt();
    let mut u = problem.u0.clone();
    let mut g = vec![0.0; n];
    let mut iterations = Vec::with_capacity(problem.spec.nsteps);
    let start = Instant::now();

    for step in 1..=problem.spec.nsteps {
        problem.b.spmv(&u, &mut g);
        if let Some(re) = problem.spec.reaction {
            for (gi, ui) in g.iter_mut().zip(&u) {
                *gi += dt * re.k1 * ui * (1.0 - ui / re.k2);
            }
        }
        let mut x = if opts.warm_start { u.clone() } else { vec![0.0; n] };
        let stats = pcg(&problem.a, &g, &mut x, precond, opts.tol, opts.maxit)?;
        if !stats.converged {
            return Err(Error::Numerical(format!(
                "time step {step}: pcg stalled at relative residual {:e} after {} iterations",
                stats.final_relres, stats.iterations
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "time step {step}: solution contains non-finite values"
            )));
        }
        u = x;
        iterations.push(stats.iterations);
        on_step(step, &u);
    }

    let solve_seconds = start.elapsed().as_secs_f64();
    let mean_iterations = if iterations.is_empty() {
        0.0
    } else {
        iterations.iter().sum::<usize>() as f64 / iterations.len() as f64
    };
    Ok(CnRunResult { u, iterations, mean_iterations, solve_seconds })
}
