//! Time-step the 2d heat equation with a rough random coefficient field,
//! comparing the multilevel preconditioner against incomplete Cholesky.

use parahif::config::parse_config;
use parahif::bench::{bench_rows_with_workers, csv_text};

fn main() -> parahif::Result<()> {
    let cfg = parse_config(
        "[problem]\n\
         kind = heat2d\n\
         n = 64\n\
         nsteps = 50\n\
         [solver]\n\
         precond = phif\n\
         eps = 1e-3,1e-6\n\
         [solver]\n\
         precond = ichol\n\
         eps = 1e-3\n",
    )?;
    let rows = bench_rows_with_workers(&cfg, 1)?;
    print!("{}", csv_text(&rows));
    let phif = rows[0].n_i_mean;
    let ichol = rows[2].n_i_mean;
    println!(
        "\nmean PCG iterations per step: {phif} (multilevel, eps 1e-3) vs {ichol} (ichol 1e-3)"
    );
    Ok(())
}
