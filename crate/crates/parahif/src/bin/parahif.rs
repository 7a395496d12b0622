use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parahif::bench::{csv_text, run_bench, run_info, run_solve, write_convergence};
use parahif::config::Config;

#[derive(Parser)]
#[command(
    name = "parahif",
    version,
    about = "Config-driven parabolic PDE solver benchmarks with a multilevel \
             interpolative factorization preconditioner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (problem, solver) pair in the config and write the CSV table.
    Bench { config: PathBuf },
    /// Grid-refinement study: errors against the finest run and, when
    /// available, the exact solution.
    Converge { config: PathBuf },
    /// Run the first (problem, solver) pair once, dumping field snapshots.
    Solve { config: PathBuf },
    /// Print the parsed config and derived quantities without solving.
    Info { config: PathBuf },
}

fn run(cmd: Command) -> parahif::Result<()> {
    match cmd {
        Command::Bench { config } => {
            let cfg = Config::load(&config)?;
            let (rows, path) = run_bench(&cfg)?;
            print!("{}", csv_text(&rows));
            eprintln!("wrote {}", path.display());
        }
        Command::Converge { config } => {
            let cfg = Config::load(&config)?;
            let (result, path) = write_convergence(&cfg)?;
            print!("{}", result.csv_text());
            eprintln!("wrote {}", path.display());
        }
        Command::Solve { config } => {
            let cfg = Config::load(&config)?;
            let (report, path) = run_solve(&cfg)?;
            println!("{}", parahif::report::CSV_HEADER);
            println!("{}", report.csv_row());
            eprintln!("wrote {} and field dumps alongside it", path.display());
        }
        Command::Info { config } => {
            let cfg = Config::load(&config)?;
            print!("{}", run_info(&cfg));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
