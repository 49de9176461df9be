//! `qaoa`: graph corpora, GNN training, warm starts, single QAOA runs and
//! benchmark presets.
//!
//! Exit codes: 0 success, 2 configuration error, 3 resource cap,
//! 4 numerical failure.

mod bench;
mod commands;
mod config;
mod error;
mod output;
mod runner;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use config::ExperimentConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "qaoa", version, about = "Max-Cut QAOA with GNN, relaxation and annealing warm starts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of random k-regular graphs as edge-list files.
    GenerateGraphs {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the exact Max-Cut value of a graph file.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Train a GNN on random regular graphs and write a checkpoint.
    TrainGnn {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce a warm start (GW or GNN) for one graph and export it.
    Warmstart {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimise QAOA angles on one graph; prints the final ratio.
    RunQaoa {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the per-epoch trace CSV here (includes wall times).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Run a benchmark preset into an output directory.
    Benchmark {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn effective_config(path: Option<&PathBuf>, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let base = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    base.apply_overrides(overrides)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenerateGraphs { n, k, count, seed, out } => commands::generate_graphs(n, k, count, seed, &out),
        Command::Oracle { graph } => commands::oracle(&graph),
        Command::TrainGnn { config, overrides, seed, out } => {
            let cfg = effective_config(config.as_ref(), &overrides)?;
            commands::train_gnn(&cfg, seed, &out)
        }
        Command::Warmstart { graph, config, overrides, seed, out } => {
            let cfg = effective_config(config.as_ref(), &overrides)?;
            commands::warmstart(&cfg, &graph, seed, &out)
        }
        Command::RunQaoa { graph, config, overrides, seed, trace_out } => {
            let cfg = effective_config(config.as_ref(), &overrides)?;
            commands::run_qaoa(&cfg, &graph, seed, trace_out.as_deref())
        }
        Command::Benchmark { preset, config, overrides, seed, out, jobs } => {
            bench::run_preset(&preset, config.as_deref(), &overrides, seed, &out, jobs)
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
