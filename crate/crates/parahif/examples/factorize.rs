//! Build the Crank-Nicolson matrix for a small 2d heat problem and factorize
//! it at two tolerances, printing per-level statistics and the estimated
//! factorization errors.

use parahif::estimate::{est_e_a, est_e_s};
use parahif::grid::{CoeffField, GridSpec, InitKind, ProblemKind, ProblemSpec};
use parahif::hif::factorize;
use parahif::solver::build_problem;

fn main() -> parahif::Result<()> {
    let spec = ProblemSpec {
        kind: ProblemKind::Heat2d,
        grid: GridSpec::with_depth(2, 64, 8)?,
        dt_factor: 1.0,
        nsteps: 1,
        seed: 0,
        coeff: CoeffField::Bumps { m: 100, sigma2: 0.005, lo: 0.1, hi: 10.0 },
        init: InitKind::TwoGaussians { c1: 0.35, c2: 0.65, sigma2: 0.05 },
        reaction: None,
    };
    let problem = build_problem(&spec)?;
    println!(
        "problem {}: {} dofs, dt = {}",
        spec.problem_id(),
        problem.grid.n_dofs(),
        spec.dt()
    );

    for eps in [1e-3, 1e-6] {
        let f = factorize(&problem.a, &problem.hier, eps)?;
        println!("\neps = {eps}");
        for (ell, st) in f.level_stats().iter().enumerate() {
            println!(
                "  level {ell}: eliminated {}, skeleton-dropped {}, kept {}, {} still active",
                st.eliminated, st.redundant, st.skeleton_kept, st.active_after
            );
        }
        println!("  dense root: {} dofs", f.root_size());
        println!("  memory: {} bytes", f.memory_bytes());
        println!("  e_a = {:.3e}", est_e_a(&problem.a, &f, 1e-2, 0)?);
        println!("  e_s = {:.3e}", est_e_s(&problem.a, &f, 1e-2, 0)?);
    }
    Ok(())
}
