use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use inftorus_cli::{run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "inftorus", version, about = "Linear flows on infinite-dimensional tori")]
struct Cli {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,

    /// Output directory for the report and CSV files
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Seed for Monte Carlo sampling; overrides params.seed
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    verbose: bool,

    /// Worker threads (results do not depend on this)
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match go(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn go(cli: &Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("--workers: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    let cfg = RunConfig::load(&cli.config, cli.seed)?;
    let output = run::execute(&cfg, cli.verbose)?;
    for path in run::write(&cli.out, &output)? {
        if cli.verbose {
            eprintln!("[inftorus] wrote {}", path.display());
        }
    }
    Ok(())
}
