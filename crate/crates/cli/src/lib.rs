//! Command-line runner for infofit experiments: configuration, run
//! directories, file formats and a rayon executor.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod run;

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use clap::ValueEnum;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::parallel::RayonExecutor;
use crate::run::{Meta, RunDir, TableFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Fitness,
    Evolve,
    Conceptualize,
    Collective,
    Survival,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fitness => "fitness",
            Command::Evolve => "evolve",
            Command::Conceptualize => "conceptualize",
            Command::Collective => "collective",
            Command::Survival => "survival",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub command: Command,
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub format: TableFormat,
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Result<String, CliError>,
    pub out_dir: Option<PathBuf>,
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Load the config, apply overrides, snapshot it and run the command.
pub fn execute(opts: &RunOptions) -> Outcome {
    let started_at = timestamp();
    let mut cfg = match RunConfig::load(&opts.config) {
        Ok(c) => c,
        Err(e) => return Outcome { exit_code: e.exit_code(), report: Err(e), out_dir: None },
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = Some(out.clone());
    }
    let out_dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(opts.command.name()));
    let config_dir = opts.config.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut run = match RunDir::create(&out_dir, opts.format, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome { exit_code: e.exit_code(), report: Err(e), out_dir: None },
    };
    let report = dispatch(opts, &cfg, &config_dir, &mut run).and_then(|r| run.finish().map(|_| r));
    let exit_code = report.as_ref().map_or_else(CliError::exit_code, |_| 0);
    let meta = Meta {
        command: opts.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema: cfg.schema.clone(),
        seed: cfg.seed,
        workers: opts.workers,
        started_at,
        finished_at: timestamp(),
        exit_code,
        error: report.as_ref().err().map(|e| e.to_string()),
    };
    let meta_path = out_dir.join("meta.json");
    let written = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
    if let Err(e) = std::fs::write(&meta_path, written) {
        let e = CliError::Io { path: meta_path, source: e };
        return Outcome { exit_code: e.exit_code(), report: Err(e), out_dir: Some(out_dir) };
    }
    Outcome { exit_code, report, out_dir: Some(out_dir) }
}

fn dispatch(opts: &RunOptions, cfg: &RunConfig, config_dir: &Path, run: &mut RunDir) -> CliResult<String> {
    let exec = RayonExecutor::new(opts.workers).map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    match opts.command {
        Command::Fitness => commands::fitness(cfg, run, &exec),
        Command::Evolve => commands::evolve(cfg, run, &exec),
        Command::Conceptualize => commands::conceptualize(cfg, run, &exec),
        Command::Collective => commands::collective(cfg, config_dir, run, &exec),
        Command::Survival => commands::survival(cfg, run, &exec),
    }
}
