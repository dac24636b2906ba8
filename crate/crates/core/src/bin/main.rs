use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relay_diffusion::config::parse_config;
use relay_diffusion::output::simulate;
use relay_diffusion::verify::{exit_code, run_suite, Level, DEFAULT_SEED};

/// Relay-driven reaction-diffusion simulator.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configuration and write scalars, snapshots and a report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: reading {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            match simulate(&cfg, &dir) {
                Ok(report) => {
                    let a = &report.asymptotics;
                    println!(
                        "t = {}  v = {:e}  w = {}  conservation residual = {:e}",
                        a.t_final, a.v_final, a.w_final, a.conservation_residual
                    );
                    println!("wrote {}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Verify { level, seed } => {
            let results = run_suite(level, seed, |r| println!("{r}"));
            ExitCode::from(exit_code(&results) as u8)
        }
    }
}
