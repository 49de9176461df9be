//! LSTM meta-optimiser: `s_{t+1}, θ_{t+1} = RNN_φ(s_t, θ_t, C_t)`.
//!
//! The cell consumes the current angles and the ratio-scaled cost
//! `C_t / optimum` (scale invariance lets one meta-optimiser serve mixed
//! corpora), and its output head proposes the next angles through a
//! `π·tanh` squash, so every proposal lands in `[-π, π]` by construction.
//! Training unrolls the cell through the differentiable circuit expectation:
//! circuit gradients enter the tape analytically via a custom op, network
//! gradients flow by backpropagation through time.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use std::rc::Rc;
use std::time::Instant;

use super::{outcome_from, sgd_continue, InstancePool, NeuralOptError, PlateauDetector, SgdHandoff};
use crate::grad::{backward, checkpoint, clip_grad_norm, Adam, Tensor};
use crate::graphs::Graph;
use crate::optim::{CostContext, RunOutcome, TraceRow};
use crate::qsim::{Init, QaoaParams};

const GATES: usize = 4; // input, forget, cell, output

pub struct MetaOptimiser {
    wx: Vec<Tensor>,
    wh: Vec<Tensor>,
    bias: Vec<Tensor>,
    w_out: Tensor,
    b_out: Tensor,
    hidden: usize,
    action_dim: usize,
}

impl MetaOptimiser {
    pub fn new(action_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = action_dim + 1;
        let mut make = |rows: usize, cols: usize| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            Tensor::parameter(Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound)))
        };
        let wx = (0..GATES).map(|_| make(input, hidden)).collect();
        let wh = (0..GATES).map(|_| make(hidden, hidden)).collect();
        // forget gate bias starts at 1 so early unrolls retain state
        let bias = (0..GATES)
            .map(|gate| {
                let fill = if gate == 1 { 1.0 } else { 0.0 };
                Tensor::parameter(Array2::from_elem((1, hidden), fill))
            })
            .collect();
        let w_out = make(hidden, action_dim);
        let b_out = Tensor::parameter(Array2::zeros((1, action_dim)));
        Self { wx, wh, bias, w_out, b_out, hidden, action_dim }
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn parameters(&self) -> Vec<Tensor> {
        let mut out = Vec::new();
        out.extend(self.wx.iter().cloned());
        out.extend(self.wh.iter().cloned());
        out.extend(self.bias.iter().cloned());
        out.push(self.w_out.clone());
        out.push(self.b_out.clone());
        out
    }

    fn zero_state(&self) -> (Tensor, Tensor) {
        (
            Tensor::constant(Array2::zeros((1, self.hidden))),
            Tensor::constant(Array2::zeros((1, self.hidden))),
        )
    }

    fn cell(&self, x: &Tensor, h: &Tensor, c: &Tensor) -> Result<(Tensor, Tensor), NeuralOptError> {
        let gate = |k: usize| -> Result<Tensor, NeuralOptError> {
            Ok(x.matmul(&self.wx[k])?.add(&h.matmul(&self.wh[k])?)?.add_bias(&self.bias[k])?)
        };
        let i = gate(0)?.sigmoid();
        let f = gate(1)?.sigmoid();
        let g = gate(2)?.tanh();
        let o = gate(3)?.sigmoid();
        let c_next = f.elementwise_mul(c)?.add(&i.elementwise_mul(&g)?)?;
        let h_next = o.elementwise_mul(&c_next.tanh())?;
        Ok((h_next, c_next))
    }

    fn propose(&self, h: &Tensor) -> Result<Tensor, NeuralOptError> {
        Ok(h.matmul(&self.w_out)?.add_bias(&self.b_out)?.tanh().scale(std::f64::consts::PI))
    }

    pub fn save<W: Write>(&self, w: &mut W) -> Result<(), NeuralOptError> {
        writeln!(w, "# meta v1 action={} hidden={}", self.action_dim, self.hidden)
            .map_err(checkpoint::CheckpointError::Io)?;
        let named: Vec<(String, Array2<f64>)> = self
            .named_parameters()
            .into_iter()
            .map(|(n, t)| (n, t.value().clone()))
            .collect();
        checkpoint::write_tensors(w, &named).map_err(checkpoint::CheckpointError::Io)?;
        Ok(())
    }

    pub fn load<R: BufRead>(r: &mut R) -> Result<Self, NeuralOptError> {
        let mut header = String::new();
        r.read_line(&mut header).map_err(checkpoint::CheckpointError::Io)?;
        if !header.starts_with("# meta v1") {
            return Err(NeuralOptError::BadHeader(header.trim().into()));
        }
        let mut action = None;
        let mut hidden = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("action=") {
                action = v.parse::<usize>().ok();
            } else if let Some(v) = tok.strip_prefix("hidden=") {
                hidden = v.parse::<usize>().ok();
            }
        }
        let meta = Self::new(
            action.ok_or_else(|| NeuralOptError::BadHeader("missing action".into()))?,
            hidden.ok_or_else(|| NeuralOptError::BadHeader("missing hidden".into()))?,
            0,
        );
        let tensors = checkpoint::read_tensors(r)?;
        let named = meta.named_parameters();
        if tensors.len() != named.len() {
            return Err(NeuralOptError::BadHeader("tensor count mismatch".into()));
        }
        for ((name, data), (expect, slot)) in tensors.into_iter().zip(named) {
            if name != expect || (data.nrows(), data.ncols()) != slot.shape() {
                return Err(NeuralOptError::BadHeader(format!("unexpected tensor {name}")));
            }
            slot.set_value(data);
        }
        Ok(meta)
    }

    fn named_parameters(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        for (k, t) in self.wx.iter().enumerate() {
            out.push((format!("wx{k}"), t.clone()));
        }
        for (k, t) in self.wh.iter().enumerate() {
            out.push((format!("wh{k}"), t.clone()));
        }
        for (k, t) in self.bias.iter().enumerate() {
            out.push((format!("b{k}"), t.clone()));
        }
        out.push(("w_out".into(), self.w_out.clone()));
        out.push(("b_out".into(), self.b_out.clone()));
        out
    }
}

/// Circuit cost as a tape node: forward is `cost(θ)`, backward routes the
/// analytic circuit gradient.
fn cost_op(theta: &Tensor, ctx: &Rc<CostContext>) -> Tensor {
    let flat: Vec<f64> = theta.value().row(0).to_vec();
    let params = QaoaParams::from_flat(&flat).expect("theta rows are 2p wide");
    let value = ctx.cost(&params);
    let grad = ctx.cost_gradient(&params);
    let grad_row = Array2::from_shape_fn((1, flat.len()), |(_, j)| grad[j]);
    Tensor::custom_unary(theta, Array2::from_elem((1, 1), value), move |g| &grad_row * g[[0, 0]])
}

#[derive(Debug, Clone)]
pub struct MetaConfig {
    pub unroll: usize,
    pub meta_epochs: usize,
    pub lr: f64,
    pub exploration_weight: f64,
    pub clip_norm: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self { unroll: 15, meta_epochs: 400, lr: 1e-2, exploration_weight: 0.05, clip_norm: 1.0, hidden: 64, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct MetaTrainReport {
    pub meta_losses: Vec<f64>,
    /// How many meta-gradients hit the norm clip.
    pub clip_events: usize,
}

/// Train by unrolled backpropagation through the circuit expectation.
///
/// The meta-loss is the observed-improvement sum
/// `Σ_t min(C_t - best_{<t}, 0)` over ratio-scaled costs, minus a bounded
/// exploration bonus `w · mean_t (1 - exp(-mean(Δθ_t^2)))`. The bonus
/// saturates at `w`, so it can nudge the cell off the stationary proposal
/// but never outweigh observed improvement.
pub fn meta_train(pool: &InstancePool, cfg: &MetaConfig) -> Result<(MetaOptimiser, MetaTrainReport), NeuralOptError> {
    if cfg.unroll < 2 {
        return Err(NeuralOptError::UnrollTooShort(cfg.unroll));
    }
    let meta = MetaOptimiser::new(pool.action_dim(), cfg.hidden, cfg.seed);
    let params = meta.parameters();
    let mut opt = Adam::new(cfg.lr, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut meta_losses = Vec::with_capacity(cfg.meta_epochs);
    let mut clip_events = 0;

    for epoch in 0..cfg.meta_epochs {
        let (ctx, p) = pool.get(rng.gen_range(0..pool.len()));
        let theta0 = crate::init::xavier_init(p, rng.gen()).expect("p >= 1");
        let loss = unrolled_loss(&meta, &ctx, &theta0, cfg.unroll, cfg.exploration_weight)?;
        let value = loss.item();
        if !value.is_finite() {
            return Err(NeuralOptError::Diverged { iteration: epoch });
        }
        meta_losses.push(value);
        backward(&loss)?;
        let (_, clipped) = clip_grad_norm(&params, cfg.clip_norm);
        if clipped {
            clip_events += 1;
        }
        opt.step(&params);
    }
    Ok((meta, MetaTrainReport { meta_losses, clip_events }))
}

fn unrolled_loss(
    meta: &MetaOptimiser,
    ctx: &Rc<CostContext>,
    theta0: &QaoaParams,
    unroll: usize,
    exploration_weight: f64,
) -> Result<Tensor, NeuralOptError> {
    let d = 2 * theta0.p();
    let scale = 1.0 / ctx.optimum();
    let (mut h, mut c) = meta.zero_state();
    let mut theta = Tensor::constant(Array2::from_shape_fn((1, d), |(_, j)| theta0.flat()[j]));

    let mut best = f64::INFINITY;
    let mut improvement_terms: Vec<Tensor> = Vec::new();
    let mut exploration_terms: Vec<Tensor> = Vec::new();
    let zero = Tensor::scalar(0.0);

    for step in 0..=unroll {
        let cost_t = cost_op(&theta, ctx).scale(scale);
        let cost_value = cost_t.item();
        if step > 0 {
            // best-so-far enters as a detached constant
            let gap = cost_t.add_scalar_t(&Tensor::scalar(-best))?;
            improvement_terms.push(gap.min_elem(&zero)?);
        }
        best = best.min(cost_value);
        if step == unroll {
            break;
        }
        let x = theta.concat_cols(&cost_t)?;
        let (h_next, c_next) = meta.cell(&x, &h, &c)?;
        let proposal = meta.propose(&h_next)?;
        let diff = proposal.sub(&theta)?;
        let saturated = diff.elementwise_mul(&diff)?.mean_all().neg().exp().neg().affine(1.0, 1.0);
        exploration_terms.push(saturated);
        theta = proposal;
        h = h_next;
        c = c_next;
    }

    let mut loss = improvement_terms
        .into_iter()
        .reduce(|a, b| a.add(&b).expect("scalars"))
        .expect("unroll >= 2 yields terms");
    if exploration_weight != 0.0 {
        let count = exploration_terms.len() as f64;
        let explore = exploration_terms
            .into_iter()
            .reduce(|a, b| a.add(&b).expect("scalars"))
            .expect("unroll >= 1");
        loss = loss.sub(&explore.scale(exploration_weight / count))?;
    }
    Ok(loss)
}

/// Greedy rollout of `steps` proposals (with plateau early-stop), then SGD
/// continuation from exactly the final proposal.
pub fn meta_optimise(
    meta: &MetaOptimiser,
    g: &Graph,
    init: &Init,
    params0: &QaoaParams,
    steps: usize,
    handoff: SgdHandoff,
) -> Result<RunOutcome, NeuralOptError> {
    let context = Rc::new(CostContext::new(g, init)?);
    let start = Instant::now();
    let d = 2 * params0.p();
    let mut trace = Vec::new();
    let mut theta = Tensor::constant(Array2::from_shape_fn((1, d), |(_, j)| params0.flat()[j]));
    let (mut h, mut c) = meta.zero_state();

    let mut cost = context.cost_flat(&params0.flat());
    trace.push(TraceRow { epoch: 0, cost, ratio: -cost / context.optimum(), wall_ms: 0.0 });
    let mut plateau = PlateauDetector::new(cost);
    let mut epoch = 0;

    for _ in 0..steps {
        let cost_t = cost_op(&theta, &context).scale(1.0 / context.optimum());
        let x = theta.concat_cols(&cost_t)?;
        let (h_next, c_next) = meta.cell(&x, &h, &c)?;
        theta = meta.propose(&h_next)?;
        h = h_next;
        c = c_next;
        let flat: Vec<f64> = theta.value().row(0).to_vec();
        cost = context.cost_flat(&flat);
        epoch += 1;
        trace.push(TraceRow {
            epoch,
            cost,
            ratio: -cost / context.optimum(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        if plateau.push(cost) {
            break;
        }
    }

    let flat: Vec<f64> = theta.value().row(0).to_vec();
    let params = QaoaParams::from_flat(&flat)?;
    let final_params = sgd_continue(&context, params, handoff, &mut trace, epoch, start)?;
    Ok(outcome_from(&context, final_params, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralopt::Instance;
    use crate::optim::{run_optimisation, Optimiser};

    fn single_edge_pool() -> InstancePool {
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        InstancePool::new(&[Instance { graph: g, init: Init::Cold, p: 1 }]).unwrap()
    }

    #[test]
    fn untrained_proposals_are_bounded() {
        let meta = MetaOptimiser::new(4, 32, 5);
        let h = Tensor::constant(Array2::from_elem((1, 32), 3.0));
        let proposal = meta.propose(&h).unwrap();
        assert!(proposal.value().iter().all(|v| v.abs() <= std::f64::consts::PI));
    }

    #[test]
    fn rejects_short_unrolls() {
        let pool = single_edge_pool();
        let cfg = MetaConfig { unroll: 1, ..Default::default() };
        assert!(matches!(meta_train(&pool, &cfg), Err(NeuralOptError::UnrollTooShort(1))));
    }

    #[test]
    fn zero_steps_is_pure_sgd() {
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        let meta = MetaOptimiser::new(2, 16, 0);
        let params0 = QaoaParams::new(vec![0.3], vec![0.2]).unwrap();
        let handoff = SgdHandoff { lr: 0.01, epochs: 30 };
        let out = meta_optimise(&meta, &g, &Init::Cold, &params0, 0, handoff).unwrap();
        let sgd = run_optimisation(&g, &Init::Cold, &params0, &Optimiser::Sgd { lr: 0.01 }, 30, 0).unwrap();
        assert_eq!(out.trace.len(), sgd.trace.len());
        for (a, b) in out.trace.iter().zip(&sgd.trace) {
            assert!((a.cost - b.cost).abs() < 1e-12);
        }
    }

    #[test]
    fn proposal_sequence_is_deterministic() {
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        let meta = MetaOptimiser::new(2, 16, 7);
        let params0 = QaoaParams::new(vec![0.1], vec![0.4]).unwrap();
        let handoff = SgdHandoff { lr: 0.01, epochs: 0 };
        let a = meta_optimise(&meta, &g, &Init::Cold, &params0, 12, handoff).unwrap();
        let b = meta_optimise(&meta, &g, &Init::Cold, &params0, 12, handoff).unwrap();
        assert_eq!(a.params, b.params);
        let costs = |o: &RunOutcome| o.trace.iter().map(|r| r.cost).collect::<Vec<_>>();
        assert_eq!(costs(&a), costs(&b));
    }

    #[test]
    fn meta_training_reduces_the_loss() {
        let pool = single_edge_pool();
        let cfg = MetaConfig { unroll: 10, meta_epochs: 150, seed: 3, ..Default::default() };
        let (_, report) = meta_train(&pool, &cfg).unwrap();
        let first: f64 = report.meta_losses[..10].iter().sum::<f64>() / 10.0;
        let tail: f64 = report.meta_losses[report.meta_losses.len() - 10..].iter().sum::<f64>() / 10.0;
        assert!(tail < first, "meta loss did not fall: {first} -> {tail}");
    }

    #[test]
    fn trained_meta_solves_the_single_edge_quickly() {
        let pool = single_edge_pool();
        let cfg = MetaConfig { unroll: 12, meta_epochs: 700, seed: 1, ..Default::default() };
        let (meta, _) = meta_train(&pool, &cfg).unwrap();
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        let params0 = crate::init::xavier_init(1, 99).unwrap();
        let out = meta_optimise(&meta, &g, &Init::Cold, &params0, 10, SgdHandoff { lr: 0.01, epochs: 0 }).unwrap();
        let best = out.trace.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        assert!(best >= 0.9, "best ratio over 10 proposals: {best}");
    }

    #[test]
    fn checkpoint_round_trips() {
        let meta = MetaOptimiser::new(4, 24, 9);
        let mut buf = Vec::new();
        meta.save(&mut buf).unwrap();
        let loaded = MetaOptimiser::load(&mut buf.as_slice()).unwrap();
        let h = Tensor::constant(Array2::from_elem((1, 24), 0.3));
        assert_eq!(*meta.propose(&h).unwrap().value(), *loaded.propose(&h).unwrap().value());
    }
}
