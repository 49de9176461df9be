//! Shared run machinery: corpus handling, init construction and single
//! QAOA runs under an [`ExperimentConfig`].

use std::io::BufReader;
use std::path::Path;

use qaoa_core::gnn::GnnModel;
use qaoa_core::graphs::{random_regular, Graph};
use qaoa_core::init::{gw_relaxation, tqa_init, xavier_init, WarmStart, WarmStartSource};
use qaoa_core::optim::{run_with_context, CostContext, RunOutcome};
use qaoa_core::qsim::{Init, QaoaParams};

use crate::config::{ExperimentConfig, InitConfig};
use crate::error::CliError;

/// Mix a base seed with a cell index into an independent stream seed.
pub fn cell_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base.wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15)).wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read graph {}: {e}", path.display())))?;
    Ok(Graph::from_edge_list(&text)?)
}

/// Generate `count` random regular graphs with per-graph derived seeds.
pub fn corpus(n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Graph>, CliError> {
    (0..count)
        .map(|i| random_regular(n, k, cell_seed(seed, i as u64)).map_err(CliError::from))
        .collect()
}

pub fn load_model(path: &Path) -> Result<GnnModel, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open checkpoint {}: {e}", path.display())))?;
    Ok(GnnModel::load(&mut BufReader::new(file))?)
}

/// Build the initial state for a graph according to the init section.
///
/// `tqa` and `cold` share the uniform-superposition state; warm starts come
/// from the GW pipeline, a trained GNN or a warm-start file.
pub fn build_init(cfg: &InitConfig, g: &Graph, seed: u64, model: Option<&GnnModel>) -> Result<Init, CliError> {
    match cfg.method.as_str() {
        "cold" | "tqa" => Ok(Init::Cold),
        "gw" => {
            let rank = qaoa_core::init::default_rank(g.n());
            let outcome = gw_relaxation(g, rank, cfg.gw_rounds.max(1), seed);
            let ws = WarmStart::with_source(outcome.x_star, cfg.epsilon, WarmStartSource::Gw)?;
            Ok(Init::Warm(ws))
        }
        "gnn" => {
            let owned;
            let model = match model {
                Some(m) => m,
                None => {
                    let path = cfg
                        .checkpoint
                        .as_deref()
                        .ok_or_else(|| CliError::Config("init.method = \"gnn\" needs init.checkpoint".into()))?;
                    owned = load_model(Path::new(path))?;
                    &owned
                }
            };
            Ok(Init::Warm(qaoa_core::gnn::warmstart_from_gnn(model, g, cfg.epsilon)?))
        }
        "file" => {
            let path = cfg
                .warmstart_file
                .as_deref()
                .ok_or_else(|| CliError::Config("init.method = \"file\" needs init.warmstart_file".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read warm start {path}: {e}")))?;
            Ok(Init::Warm(WarmStart::from_text(&text)?))
        }
        other => Err(CliError::Config(format!("unknown init method {other:?}"))),
    }
}

/// Initial angles: Xavier by default, the TQA schedule for `tqa` runs, or
/// zero.
pub fn initial_params(config: &ExperimentConfig, p: usize, seed: u64) -> Result<QaoaParams, CliError> {
    let scheme = if config.init.method == "tqa" { "tqa" } else { config.qaoa.angles.as_str() };
    Ok(match scheme {
        "tqa" => tqa_init(p, config.init.dt)?,
        "zero" => QaoaParams::zeros(p),
        "xavier" => xavier_init(p, seed)?,
        other => return Err(CliError::Config(format!("unknown angle scheme {other:?}"))),
    })
}

/// One full optimisation run on a prebuilt context.
pub fn run_cell(
    context: &CostContext,
    config: &ExperimentConfig,
    p: usize,
    seed: u64,
) -> Result<RunOutcome, CliError> {
    let params0 = initial_params(config, p, seed)?;
    let optimiser = config.optimiser.build()?;
    Ok(run_with_context(context, &params0, &optimiser, config.qaoa.epochs, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_are_spread_out() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| cell_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = corpus(8, 3, 4, 9).unwrap();
        let b = corpus(8, 3, 4, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tqa_method_sets_the_schedule() {
        let mut config = ExperimentConfig::default();
        config.init.method = "tqa".into();
        let params = initial_params(&config, 2, 0).unwrap();
        assert_eq!(params.gammas(), &[0.375, 0.75]);
    }
}
