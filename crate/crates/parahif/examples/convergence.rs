//! Grid-refinement study with the separable exact solution
//! u = prod sin(pi x_a) * exp(-d pi^2 t): halving h and dt together should
//! show a slope close to 2.

use parahif::bench::run_convergence;
use parahif::config::parse_config;

fn main() -> parahif::Result<()> {
    let cfg = parse_config(
        "[problem]\n\
         kind = heat2d\n\
         n = 32\n\
         nsteps = 8\n\
         coeff.constant = 1\n\
         init.kind = sine_product\n\
         [solver]\n\
         precond = phif\n\
         eps = 1e-9\n\
         [convergence]\n\
         ns = 32,64,128\n",
    )?;
    let result = run_convergence(&cfg)?;
    print!("{}", result.csv_text());
    println!(
        "fitted slope vs exact solution: {:.3} (second order would be 2)",
        result.exact_slope.unwrap()
    );
    Ok(())
}
