//! Neural optimisers for QAOA angles: a PPO actor-critic that learns a
//! parameter-update policy, and an LSTM meta-optimiser that proposes the
//! next parameter vector outright. Both hand off to fixed-rate SGD once
//! they plateau, continuing the trace from exactly their final parameters.

mod lstm;
mod mlp;
mod ppo;

pub use lstm::{meta_optimise, meta_train, MetaConfig, MetaOptimiser, MetaTrainReport};
pub use mlp::Mlp;
pub use ppo::{rl_optimise, rl_train, PolicyNets, RlTrainConfig, RlTrainReport};

use std::rc::Rc;
use std::time::Instant;

use thiserror::Error;

use crate::grad::GradError;
use crate::graphs::{Graph, GraphError};
use crate::optim::{sgd_step, CostContext, OptimError, RunOutcome, TraceRow};
use crate::qsim::{Init, QaoaParams, SimError};

#[derive(Debug, Error)]
pub enum NeuralOptError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Checkpoint(#[from] crate::grad::checkpoint::CheckpointError),
    #[error("training loss became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("instance pool is empty")]
    EmptyPool,
    #[error("bad checkpoint header: {0}")]
    BadHeader(String),
    #[error("unroll length must be at least 2, got {0}")]
    UnrollTooShort(usize),
}

/// A QAOA training instance: problem graph, initial state and depth.
pub struct Instance {
    pub graph: Graph,
    pub init: Init,
    pub p: usize,
}

/// Prebuilt evaluation contexts for a distribution of instances.
///
/// Contexts are shared via `Rc` so rollouts and tape closures can hold them
/// cheaply.
pub struct InstancePool {
    entries: Vec<(Rc<CostContext>, usize)>,
}

impl InstancePool {
    pub fn new(instances: &[Instance]) -> Result<Self, NeuralOptError> {
        if instances.is_empty() {
            return Err(NeuralOptError::EmptyPool);
        }
        let entries = instances
            .iter()
            .map(|inst| Ok((Rc::new(CostContext::new(&inst.graph, &inst.init)?), inst.p)))
            .collect::<Result<_, NeuralOptError>>()?;
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn get(&self, idx: usize) -> (Rc<CostContext>, usize) {
        let (ctx, p) = &self.entries[idx % self.entries.len()];
        (Rc::clone(ctx), *p)
    }

    /// Action dimension 2p of the first instance; pools must be homogeneous
    /// in depth for a single policy to apply.
    pub fn action_dim(&self) -> usize {
        2 * self.entries[0].1
    }
}

/// SGD continuation applied after a neural optimiser converges.
#[derive(Debug, Clone, Copy)]
pub struct SgdHandoff {
    pub lr: f64,
    pub epochs: usize,
}

impl Default for SgdHandoff {
    fn default() -> Self {
        Self { lr: 0.01, epochs: 100 }
    }
}

/// Plateau rule shared by both neural optimisers: hand off once the best
/// cost has not improved by more than 1e-4 for 10 consecutive steps.
pub(crate) struct PlateauDetector {
    best: f64,
    stale: usize,
}

impl PlateauDetector {
    pub(crate) fn new(initial_cost: f64) -> Self {
        Self { best: initial_cost, stale: 0 }
    }

    /// Feed the next cost; true means "stop now".
    pub(crate) fn push(&mut self, cost: f64) -> bool {
        if cost < self.best - 1e-4 {
            self.best = cost;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= 10
    }
}

/// Continue a trace with plain SGD from exactly `params`, appending one row
/// per epoch starting at `epoch_offset + 1`.
pub(crate) fn sgd_continue(
    context: &CostContext,
    params: QaoaParams,
    handoff: SgdHandoff,
    trace: &mut Vec<TraceRow>,
    epoch_offset: usize,
    start: Instant,
) -> Result<QaoaParams, NeuralOptError> {
    let mut flat = params.flat();
    let mut current = params;
    for k in 0..handoff.epochs {
        let grad = context.cost_gradient(&current);
        sgd_step(&mut flat, &grad, handoff.lr);
        current = QaoaParams::from_flat(&flat)?;
        let cost = context.cost(&current);
        if !cost.is_finite() {
            return Err(NeuralOptError::Diverged { iteration: epoch_offset + k + 1 });
        }
        trace.push(TraceRow {
            epoch: epoch_offset + k + 1,
            cost,
            ratio: -cost / context.optimum(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(current)
}

pub(crate) fn outcome_from(context: &CostContext, params: QaoaParams, trace: Vec<TraceRow>) -> RunOutcome {
    let final_ratio = context.ratio(&params);
    RunOutcome { params, trace, final_ratio, warnings: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_detector_trips_after_ten_stale_steps() {
        let mut d = PlateauDetector::new(0.0);
        for _ in 0..9 {
            assert!(!d.push(0.0));
        }
        assert!(d.push(0.0));
    }

    #[test]
    fn plateau_detector_resets_on_improvement() {
        let mut d = PlateauDetector::new(0.0);
        for _ in 0..9 {
            assert!(!d.push(0.0));
        }
        assert!(!d.push(-1.0));
        for _ in 0..9 {
            assert!(!d.push(-1.0));
        }
        assert!(d.push(-1.0));
    }

    #[test]
    fn empty_pool_is_rejected() {
        assert!(matches!(InstancePool::new(&[]), Err(NeuralOptError::EmptyPool)));
    }
}
