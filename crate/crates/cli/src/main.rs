use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use infofit::run::TableFormat;
use infofit::{execute, Command, RunOptions};

/// Information-fitness experiments: measure, evolve, conceptualize,
/// communicate and survive.
#[derive(Parser)]
#[command(name = "infofit", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent evaluations.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(&RunOptions {
        command: cli.command,
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        workers: cli.workers,
        format: cli.format,
    });
    match &outcome.report {
        Ok(report) => print!("{report}"),
        Err(e) => eprintln!("error: {e}"),
    }
    if let Some(dir) = &outcome.out_dir {
        eprintln!("outputs: {}", dir.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
