use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aximhd::cli::{self, ApCheckArgs};

/// Axisymmetric swirl-field MHD simulator and verifier.
#[derive(Parser)]
#[command(name = "aximhd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write diagnostics.csv and run_meta.json.
    Simulate {
        /// JSON configuration file.
        config: PathBuf,
    },
    /// Run the simulations a set of checks needs and print a PASS/FAIL table.
    Verify {
        config: PathBuf,
        /// Comma-separated checks: energy-law, max-principle, pi-l2,
        /// cz-ratio, ineq31, ineq2, curl-identity.
        #[arg(long, default_value = "max-principle,energy-law")]
        checks: String,
    },
    /// Classify |y'|^alpha against the A_p condition on R^5.
    Apcheck {
        #[arg(long)]
        p: f64,
        /// Comma-separated exponents, e.g. -3,-2,0,2,3.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving ap_report.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Err(e) = cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(cli::EXIT_CONFIG as u8);
    }
    let code = match args.command {
        Command::Simulate { config } => cli::cmd_simulate(&config),
        Command::Verify { config, checks } => cli::cmd_verify(&config, &checks),
        Command::Apcheck {
            p,
            alpha,
            samples,
            seed,
            out,
        } => match cli::parse_alpha_list(&alpha) {
            Ok(alphas) => cli::cmd_apcheck(&ApCheckArgs {
                p,
                alphas,
                samples,
                seed,
                out_dir: out,
            }),
            Err(e) => {
                eprintln!("error: {e}");
                cli::EXIT_CONFIG
            }
        },
    };
    ExitCode::from(code as u8)
}
