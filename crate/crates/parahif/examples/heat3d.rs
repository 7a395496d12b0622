//! The 3d heat equation on a 31^3 interior grid: seven-point stencil,
//! octree hierarchy with face skeletonization.

use parahif::config::parse_config;
use parahif::bench::{bench_rows_with_workers, csv_text};

fn main() -> parahif::Result<()> {
    let cfg = parse_config(
        "[problem]\n\
         kind = heat3d\n\
         n = 32\n\
         nsteps = 20\n\
         [solver]\n\
         precond = phif\n\
         eps = 1e-3\n\
         [solver]\n\
         precond = ichol\n\
         eps = 1e-3\n",
    )?;
    let rows = bench_rows_with_workers(&cfg, 1)?;
    print!("{}", csv_text(&rows));
    Ok(())
}
