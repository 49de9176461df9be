//! Unsupervised training over a graph ensemble.
//!
//! The batch objective is the training-set average of the per-graph loss;
//! each optimisation step takes one full graph (graphs are tiny), with the
//! graph order reshuffled every epoch under the run seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{gnn_loss, GnnError, GnnInputs, GnnModel};
use crate::grad::{backward, Adam};
use crate::graphs::Graph;

/// Per-epoch mean losses plus the step count.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

/// Train in place with Adam; deterministic under `seed`. Aborts with a
/// diagnostic if the loss leaves the reals.
pub fn train(
    model: &GnnModel,
    training_graphs: &[Graph],
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<TrainReport, GnnError> {
    if training_graphs.is_empty() {
        return Err(GnnError::EmptyTrainingSet);
    }
    let inputs: Vec<GnnInputs> = training_graphs
        .iter()
        .map(|g| GnnInputs::new(g, model.config()))
        .collect::<Result<_, _>>()?;

    let params = model.parameters();
    let mut opt = Adam::new(lr, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(epochs);
    let mut steps = 0;

    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut epoch_sum = 0.0;
        for &idx in &order {
            let input = &inputs[idx];
            let p = model.forward(input)?;
            let loss = gnn_loss(&p, input)?;
            let value = loss.item();
            if !value.is_finite() {
                return Err(GnnError::Diverged { epoch });
            }
            epoch_sum += value;
            backward(&loss)?;
            opt.step(&params);
            steps += 1;
        }
        epoch_losses.push(epoch_sum / inputs.len() as f64);
    }
    Ok(TrainReport { epoch_losses, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{round_probabilities, GnnConfig, GnnModel};

    // The single edge has a swap automorphism, and equivariance then forces
    // p_0 = p_1 exactly, so no equivariant model can polarise it. Paths are
    // the smallest corpus with broken node symmetry (degrees 1, 2, 1) and a
    // known loss optimum of -2 (cut the middle node from both ends).
    fn path_corpus(count: usize) -> Vec<Graph> {
        (0..count).map(|_| Graph::unweighted(3, [(0, 1), (1, 2)]).unwrap()).collect()
    }

    #[test]
    fn path_corpus_polarises_to_the_known_optimum() {
        let config = GnnConfig { width: 8, hops: 1, layers: 2, ..GnnConfig::default() };
        let model = GnnModel::new(config, 0).unwrap();
        let graphs = path_corpus(200);
        let report = train(&model, &graphs, 12, 1e-2, 1).unwrap();
        let last = *report.epoch_losses.last().unwrap();
        assert!(last <= -1.98, "final mean loss {last}");

        let p = model.probabilities(&graphs[0]).unwrap();
        let (_, cut) = round_probabilities(&graphs[0], &p);
        assert_eq!(cut, 2.0);
    }

    #[test]
    fn loss_trace_trends_down_on_moving_average() {
        let config = GnnConfig { width: 8, hops: 1, layers: 2, ..GnnConfig::default() };
        let model = GnnModel::new(config, 5).unwrap();
        let graphs = path_corpus(50);
        let report = train(&model, &graphs, 15, 1e-2, 2).unwrap();
        let ma: Vec<f64> = report
            .epoch_losses
            .windows(5)
            .map(|w| w.iter().sum::<f64>() / 5.0)
            .collect();
        for pair in ma.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "moving average rose: {pair:?}");
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let graphs: Vec<Graph> = (0..4).map(|s| crate::graphs::random_regular(8, 3, s).unwrap()).collect();
        let run = || {
            let config = GnnConfig { width: 8, hops: 2, layers: 3, ..GnnConfig::default() };
            let model = GnnModel::new(config, 3).unwrap();
            train(&model, &graphs, 3, 1e-3, 9).unwrap();
            model.probabilities(&graphs[0]).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let model = GnnModel::new(GnnConfig::default(), 0).unwrap();
        assert!(matches!(train(&model, &[], 1, 1e-3, 0), Err(GnnError::EmptyTrainingSet)));
    }

    #[test]
    fn heterogeneous_sizes_train_together() {
        let mut graphs = Vec::new();
        for (n, seed) in [(6usize, 0u64), (8, 1), (10, 2), (6, 3)] {
            graphs.push(crate::graphs::random_regular(n, 3, seed).unwrap());
        }
        let config = GnnConfig { width: 8, hops: 2, layers: 2, ..GnnConfig::default() };
        let model = GnnModel::new(config, 1).unwrap();
        let report = train(&model, &graphs, 4, 1e-3, 0).unwrap();
        assert_eq!(report.epoch_losses.len(), 4);
        assert_eq!(report.steps, 16);
    }
}
