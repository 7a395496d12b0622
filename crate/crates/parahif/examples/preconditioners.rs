//! One ill-conditioned Crank-Nicolson matrix, one right-hand side, four ways
//! to solve it: unpreconditioned CG, incomplete Cholesky, and the multilevel
//! factorization at two tolerances.

use parahif::config::parse_config;
use parahif::rng;
use parahif::solver::{build_preconditioner, build_problem, pcg, PrecondChoice};

fn main() -> parahif::Result<()> {
    let cfg = parse_config("[problem]\nkind = heat2d\nn = 128\nnsteps = 1\n")?;
    let problem = build_problem(&cfg.problems[0])?;
    let n = problem.grid.n_dofs();
    let b: Vec<f64> = (0..n).map(|i| rng::signed_f64(1, i as u64)).collect();

    println!("{n} dofs, tol 1e-12, iteration counts:");
    for choice in [
        PrecondChoice::None,
        PrecondChoice::Ichol { droptol: 1e-3 },
        PrecondChoice::Phif { eps: 1e-3 },
        PrecondChoice::Phif { eps: 1e-6 },
    ] {
        let (pre, factor_s) = build_preconditioner(&problem, choice)?;
        let mut x = vec![0.0; n];
        let stats = pcg(&problem.a, &b, &mut x, &pre, 1e-12, 5000)?;
        println!(
            "  {choice:?}: {} iterations, {} bytes, factorized in {factor_s:.3}s",
            stats.iterations,
            pre.memory_bytes()
        );
    }
    Ok(())
}
