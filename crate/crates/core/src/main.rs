use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mtpgd", version, about = "Space-time PGD for cyclic elasto-plasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver(s) selected in a case configuration file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and MTPGD_OUTPUT_DIR).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Micro/macro decomposition of a sampled signal.
    Decompose {
        csv: PathBuf,
        #[arg(long)]
        ntau: usize,
        #[arg(long = "nT")]
        n_macro: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output } => mtpgd_core::cli::cmd_run(&config, output.as_deref()).map(|s| s.success),
        Command::Decompose { csv, ntau, n_macro, tol, output } => {
            mtpgd_core::cli::cmd_decompose(&csv, ntau, n_macro, tol, output.as_deref()).map(|_| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
