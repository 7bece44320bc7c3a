//! `bef`: compute boundary-effect profiles of finite 1D spin chains from
//! exact ground states and verify the inequalities they imply.
//!
//! Exit codes: 0 success, 1 verification failures, 2 configuration or
//! runtime errors.

mod config;
mod plot;
mod runner;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, OutputFormat};
use runner::Runner;

#[derive(Parser)]
#[command(name = "bef", version, about = "Boundary-effect experiment runner")]
struct Cli {
    /// Experiment config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config leaf, e.g. --set model.couplings.g_x=1.5
    /// (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides run.threads; 0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Solver seed (overrides solver.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output formats (overrides output.formats; repeatable).
    #[arg(long, global = true, value_name = "csv|json|svg")]
    format: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground energies, gaps, and diagnostics over the size range.
    Solve,
    /// Boundary-effect table mu_n(r) with windowed maximum and decay fits.
    MuProfile,
    /// Reduced-state convergence eta with the mu sandwich check per size.
    EtaScan,
    /// Two-point correlation bound in the bridge geometry.
    Correlations,
    /// Entanglement entropy growth and increment bounds.
    EntropyScan,
    /// Run all configured inequality suites; nonzero exit on any failure.
    Verify,
    /// Sweep a coupling: spectral gap against fitted decay rate.
    GapScan,
    /// Collate JSON artifacts in the output directory into a summary and
    /// overlay plots.
    Report,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config PATH is required for this subcommand"))?;
    let mut overrides = cli.sets.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("solver.seed={seed}"));
    }
    if let Some(out) = &cli.out {
        overrides.push(format!("output.directory={}", out.display()));
    }
    if let Some(threads) = cli.threads {
        overrides.push(format!("run.threads={threads}"));
    }
    if !cli.format.is_empty() {
        overrides.push(format!("output.formats=[{}]", {
            let quoted: Vec<String> = cli.format.iter().map(|f| format!("\"{f}\"")).collect();
            quoted.join(", ")
        }));
    }
    let config = ExperimentConfig::load(path, &overrides)?;
    for f in &cli.format {
        f.parse::<OutputFormat>()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    Ok(config)
}

fn init_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Report => {
            // report works from the directory alone; config is optional.
            if let Some(path) = &cli.config {
                let config = ExperimentConfig::load(path, &cli.sets)?;
                let dir = cli
                    .out
                    .clone()
                    .unwrap_or_else(|| config.output.directory.clone());
                return runner::report_directory(&dir);
            }
            let dir = cli
                .out
                .clone()
                .ok_or_else(|| anyhow::anyhow!("report needs --config or --out DIR"))?;
            runner::report_directory(&dir)
        }
        _ => {
            let config = load_config(cli)?;
            init_threads(config.run.threads);
            let runner = Runner::new(config)?;
            match cli.command {
                Command::Solve => runner.solve(),
                Command::MuProfile => runner.mu_profile(),
                Command::EtaScan => runner.eta_scan(),
                Command::Correlations => runner.correlations(),
                Command::EntropyScan => runner.entropy_scan(),
                Command::Verify => runner.verify(),
                Command::GapScan => runner.gap_scan(),
                Command::Report => unreachable!(),
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
