use std::path::PathBuf;
use std::process::ExitCode;

use chemopattern::linstab::DEFAULT_KMAX;
use chemopattern_cli::{commands, parse_config, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chemopattern", version, about = "Pattern formation in a two-species chemotaxis model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-mode stability table for one or more chi values.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_KMAX)]
        kmax: u32,
        /// chi values; defaults to the configured chi.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Critical chi, selected mode and Hopf onset data.
    Critical {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_KMAX)]
        kmax: u32,
    },
    /// Runs one simulation and writes its outputs.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Runs one simulation per parameter value.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn load(common: &Common) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("{}: {e}", common.config.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| format!("{}: {e}", common.config.display()))?;
    if let Some(out) = &common.out {
        cfg.output.directory = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Analyze { common, kmax, values } => {
            let cfg = load(&common)?;
            let chis = if values.is_empty() { vec![cfg.model.chi] } else { values };
            let path = commands::analyze(&cfg, &chis, kmax)?;
            println!("wrote {}", path.display());
        }
        Command::Critical { common, kmax } => {
            let cfg = load(&common)?;
            let (_, json) = commands::critical(&cfg, kmax)?;
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        Command::Simulate { common } => {
            let cfg = load(&common)?;
            let summary = commands::simulate(&cfg, &mut std::io::stdout())?;
            println!("{}", serde_json::to_string_pretty(&summary.to_json())?);
        }
        Command::Sweep {
            common,
            param,
            values,
            jobs,
        } => {
            let cfg = load(&common)?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let (path, rows) = commands::sweep(&cfg, &param, &values, jobs)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            println!("wrote {} ({} runs, {failed} failed)", path.display(), rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
