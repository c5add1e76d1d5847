#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;

use commands::Status;
use config::{Command, ExperimentConfig};
use output::{result_paths, Manifest};

const THREADS_VAR: &str = "DIRAC_HARDY_THREADS";

/// Numerical experiments for Dirac operators with Coulomb-type potentials.
///
/// Exit status: 0 on success or a holding verdict, 2 when a verdict fails
/// or no eigenvalue exists, 1 on configuration or numerical errors.
#[derive(Debug, Parser)]
#[command(name = "dirac-hardy", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_path` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(rayon::current_num_threads())
}

fn execute(cli: &Cli) -> Result<Status> {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    cfg.validate(cli.command)?;
    let threads = configure_threads()?;

    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    cfg.command = Some(cli.command);
    cfg.output_path = Some(dir.clone());

    let report = commands::run(cli.command, &cfg)?;
    let (csv_path, manifest_path) = result_paths(&dir, cli.command.name());
    report.table.write(&csv_path)?;

    let status = match report.status {
        Status::Success => "success",
        Status::Negative => "negative",
    };
    let mesh = format!(
        "{} N={} [{}, {}]",
        dirac_hardy::MeshScheme::from(cfg.grid.scheme),
        cfg.grid.n,
        cfg.grid.r_min,
        cfg.grid.r_max
    );
    let manifest = Manifest {
        tool: format!("dirac-hardy {}", env!("CARGO_PKG_VERSION")),
        command: cli.command.name(),
        status,
        result_file: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
        config_path: cli.config.display().to_string(),
        mesh,
        closure: dirac_hardy::OriginClosure::from(cfg.grid.closure).to_string(),
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        summary: report.summary.into_iter().collect(),
        config: &cfg,
    };
    manifest.write(&manifest_path)?;
    println!("{}: {status} -> {}", cli.command.name(), csv_path.display());
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
