//! The non-benchmark subcommands.

use std::io::Write;
use std::path::Path;

use qaoa_core::gnn::{train, GnnModel};
use qaoa_core::graphs::max_cut_oracle;
use qaoa_core::optim::CostContext;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::fmt_f64;
use crate::runner::{build_init, cell_seed, corpus, load_graph, run_cell};

/// Write a corpus of random regular graphs plus a manifest.
pub fn generate_graphs(n: usize, k: usize, count: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    let graphs = corpus(n, k, count, seed)?;
    let mut manifest = format!("# corpus n={n} k={k} count={count} seed={seed}\n");
    for (i, g) in graphs.iter().enumerate() {
        let name = format!("graph_{i:04}.txt");
        std::fs::write(out.join(&name), g.to_edge_list())?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    std::fs::write(out.join("manifest.txt"), manifest)?;
    println!("wrote {count} graphs to {}", out.display());
    Ok(())
}

/// Print the exact optimal cut of a graph file.
pub fn oracle(graph_path: &Path) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let best = max_cut_oracle(&g)?;
    println!("{}", fmt_f64(best.cut_value));
    Ok(())
}

/// Train a GNN on a generated corpus and write the checkpoint.
pub fn train_gnn(config: &ExperimentConfig, seed: u64, out: &Path) -> Result<(), CliError> {
    let model = train_gnn_model(config, seed, config.corpus.n)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(out)?);
    model.save(&mut file)?;
    file.flush()?;
    println!("checkpoint written to {}", out.display());
    Ok(())
}

/// Train a model for graphs of size `base_n` under the config's gnn section.
/// With `size_multiples > 1` the training corpus mixes sizes `base_n` up to
/// `size_multiples * base_n`, drawn uniformly.
pub fn train_gnn_model(config: &ExperimentConfig, seed: u64, base_n: usize) -> Result<GnnModel, CliError> {
    let gcfg = &config.gnn;
    let mut graphs = Vec::with_capacity(gcfg.train_count);
    for i in 0..gcfg.train_count {
        let multiple = 1 + (i % gcfg.size_multiples.max(1));
        let n = base_n * multiple;
        graphs.push(qaoa_core::graphs::random_regular(n, config.corpus.k, cell_seed(seed, i as u64))?);
    }
    let model = GnnModel::new(gcfg.model_config()?, seed)?;
    train(&model, &graphs, gcfg.train_epochs, gcfg.train_lr, cell_seed(seed, 0xf00d))?;
    Ok(model)
}

/// Produce and export a warm start for one graph.
pub fn warmstart(config: &ExperimentConfig, graph_path: &Path, seed: u64, out: &Path) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let init = build_init(&config.init, &g, seed, None)?;
    match init {
        qaoa_core::qsim::Init::Warm(ws) => {
            std::fs::write(out, ws.to_text())?;
            println!("warm start written to {}", out.display());
            Ok(())
        }
        qaoa_core::qsim::Init::Cold => Err(CliError::Config(
            "init method produces no warm start; use gw, gnn or file".into(),
        )),
    }
}

/// Run one QAOA optimisation; prints the final ratio and optionally writes
/// the per-epoch trace (including wall times, which are not deterministic).
pub fn run_qaoa(
    config: &ExperimentConfig,
    graph_path: &Path,
    seed: u64,
    trace_out: Option<&Path>,
) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let p = config.qaoa.depth_for(g.n())?;
    let init = build_init(&config.init, &g, seed, None)?;
    let context = CostContext::new(&g, &init)?;
    let outcome = run_cell(&context, config, p, seed)?;

    if let Some(path) = trace_out {
        let mut rows = Vec::with_capacity(outcome.trace.len());
        for row in &outcome.trace {
            rows.push(vec![
                graph_path.display().to_string(),
                g.n().to_string(),
                p.to_string(),
                config.init.method.clone(),
                config.optimiser.name.clone(),
                seed.to_string(),
                row.epoch.to_string(),
                fmt_f64(-row.cost),
                fmt_f64(row.ratio),
                fmt_f64(row.wall_ms),
            ]);
        }
        crate::output::write_csv(
            path,
            &["graph_id", "n", "p", "init", "optimiser", "seed", "epoch", "cut_expectation", "ratio", "wall_ms"],
            &rows,
        )?;
    }
    println!("{}", fmt_f64(outcome.final_ratio));
    Ok(())
}
