use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use apollonian::cli_io::{run_command, Command, ExperimentConfig};
use apollonian::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "apollonian", version, about = "Apollonian packing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads (0 uses every core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a packing and store it in the cache.
    Gen(Common),
    /// Count circles by conformal volume.
    Count(Common),
    /// Fit a growth exponent.
    Fit(Common),
    /// Estimate the dimension of the residual set.
    Dim(Common),
    /// Estimate the counting constant.
    Ca(Common),
    /// Orbit sums of the symmetry group.
    Orbit(Common),
    /// Draw a packing as SVG.
    Render(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut overrides = Vec::new();
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
        overrides.push((k.to_string(), v.to_string()));
    }
    if let Some(w) = common.workers {
        overrides.push(("workers".into(), w.to_string()));
    }
    match &common.config {
        Some(p) => ExperimentConfig::from_file(p, &overrides),
        None => ExperimentConfig::parse("", &overrides),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match &cli.command {
        Cmd::Gen(c) => (Command::Gen, c),
        Cmd::Count(c) => (Command::Count, c),
        Cmd::Fit(c) => (Command::Fit, c),
        Cmd::Dim(c) => (Command::Dim, c),
        Cmd::Ca(c) => (Command::Ca, c),
        Cmd::Orbit(c) => (Command::Orbit, c),
        Cmd::Render(c) => (Command::Render, c),
    };
    let start = Instant::now();
    let result = load(common).and_then(|cfg| run_command(cmd, &cfg).map(|m| (cfg, m)));
    match result {
        Ok((cfg, manifest)) => {
            for r in &manifest.results {
                println!("{}", cfg.output.join(&r.file).display());
            }
            for n in &manifest.notes {
                eprintln!("note: {n}");
            }
            eprintln!("{} finished in {:.2} s", cmd.name(), start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
