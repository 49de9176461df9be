//! Optimisers over QAOA angles: gradient descent variants, a gradient-free
//! simplex, quantum natural gradient, model gradient descent and the
//! 1-/2-/QN-SPSA family, plus the harness that runs them to a trace.
//!
//! Internally every optimiser minimises `cost(θ) = -⟨cut⟩(θ)`; reported
//! ratios are `⟨cut⟩ / optimum` against the brute-force oracle.

mod descent;
mod gradient;
mod mgd;
mod nelder_mead;
mod qng;
mod spsa;

pub use descent::{adam_step, rmsprop_step, sgd_step, DescentRule};
pub use gradient::{parameter_shift_gradient, shift_rule_gradient};
pub use mgd::{mgd_surrogate_gradient, MgdConfig};
pub use nelder_mead::{nelder_mead_minimize, NmOptions, NmOutcome};
pub use qng::{qfi_matrix, qfi_of_circuit};
pub use spsa::{delta_c_stencil, delta_f_stencil, SpsaConfig, SpsaVariant};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use thiserror::Error;

use crate::graphs::{max_cut_oracle, Graph, GraphError};
use crate::qsim::{Init, QaoaCircuit, QaoaParams, SimError};

#[derive(Debug, Error)]
pub enum OptimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cost became non-finite at epoch {epoch}")]
    NonFiniteCost { epoch: usize },
    #[error("bad optimiser configuration: {0}")]
    BadConfig(String),
}

/// A graph-specialised evaluation context: circuit plus the oracle optimum.
pub struct CostContext {
    circuit: QaoaCircuit,
    optimum: f64,
}

impl CostContext {
    pub fn new(g: &Graph, init: &Init) -> Result<Self, OptimError> {
        let circuit = QaoaCircuit::new(g, init)?;
        let optimum = max_cut_oracle(g)?.cut_value;
        Ok(Self { circuit, optimum })
    }

    pub fn circuit(&self) -> &QaoaCircuit {
        &self.circuit
    }

    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    pub fn expectation(&self, params: &QaoaParams) -> f64 {
        self.circuit.expectation(params)
    }

    /// Minimisation objective `-⟨cut⟩`.
    pub fn cost(&self, params: &QaoaParams) -> f64 {
        -self.circuit.expectation(params)
    }

    pub fn cost_flat(&self, flat: &[f64]) -> f64 {
        match QaoaParams::from_flat(flat) {
            Ok(p) => self.cost(&p),
            Err(_) => f64::NAN,
        }
    }

    /// Gradient of the minimisation objective.
    pub fn cost_gradient(&self, params: &QaoaParams) -> Vec<f64> {
        self.circuit.gradient(params).into_iter().map(|g| -g).collect()
    }

    pub fn ratio(&self, params: &QaoaParams) -> f64 {
        self.expectation(params) / self.optimum
    }

    pub fn fidelity(&self, a: &QaoaParams, b: &QaoaParams) -> f64 {
        self.circuit.fidelity(a, b)
    }
}

/// Optimiser selection with hyperparameters.
#[derive(Debug, Clone)]
pub enum Optimiser {
    Sgd { lr: f64 },
    Adam { lr: f64 },
    RmsProp { lr: f64 },
    NelderMead { init_step: f64 },
    Qng { lr: f64, lambda: f64 },
    Mgd(MgdConfig),
    Spsa(SpsaConfig),
}

impl Optimiser {
    /// Fixed-rate SGD with the benchmark default η = 0.01.
    pub fn sgd_default() -> Self {
        Optimiser::Sgd { lr: 0.01 }
    }

    pub fn name(&self) -> String {
        match self {
            Optimiser::Sgd { .. } => "sgd".into(),
            Optimiser::Adam { .. } => "adam".into(),
            Optimiser::RmsProp { .. } => "rmsprop".into(),
            Optimiser::NelderMead { .. } => "nelder-mead".into(),
            Optimiser::Qng { .. } => "qng".into(),
            Optimiser::Mgd(_) => "mgd".into(),
            Optimiser::Spsa(cfg) => format!("{}-spsa", cfg.variant.as_str()),
        }
    }
}

/// One optimisation epoch as recorded in a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub cost: f64,
    pub ratio: f64,
    pub wall_ms: f64,
}

/// State threaded through an optimisation run.
pub struct OptState {
    pub params: QaoaParams,
    pub epoch: usize,
    pub trace: Vec<TraceRow>,
    pub warnings: usize,
    moments: Moments,
    rng: ChaCha8Rng,
}

enum Moments {
    None,
    FirstSecond { m: Vec<f64>, v: Vec<f64>, t: u64 },
    Second { v: Vec<f64> },
    Preconditioned { smoothed: Option<Array2<f64>> },
}

impl OptState {
    fn new(params: QaoaParams, optimiser: &Optimiser, seed: u64) -> Self {
        let d = 2 * params.p();
        let moments = match optimiser {
            Optimiser::Adam { .. } => Moments::FirstSecond { m: vec![0.0; d], v: vec![0.0; d], t: 0 },
            Optimiser::RmsProp { .. } => Moments::Second { v: vec![0.0; d] },
            Optimiser::Spsa(_) => Moments::Preconditioned { smoothed: None },
            _ => Moments::None,
        };
        Self {
            params,
            epoch: 0,
            trace: Vec::new(),
            warnings: 0,
            moments,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

/// The final state of a finished run.
pub struct RunOutcome {
    pub params: QaoaParams,
    pub trace: Vec<TraceRow>,
    pub final_ratio: f64,
    pub warnings: usize,
}

/// Drive `optimiser` for `epochs` iterations from `params0`, recording the
/// cost, ratio and wall time per epoch. Epoch 0 is the evaluation of the
/// initial parameters; with `epochs = 0` the trace holds only that row.
/// Deterministic under `seed` (wall times aside).
pub fn run_optimisation(
    g: &Graph,
    init: &Init,
    params0: &QaoaParams,
    optimiser: &Optimiser,
    epochs: usize,
    seed: u64,
) -> Result<RunOutcome, OptimError> {
    let context = CostContext::new(g, init)?;
    run_with_context(&context, params0, optimiser, epochs, seed)
}

/// As [`run_optimisation`] but reusing a prebuilt context (the oracle run
/// and cost diagonal are shared across repetitions).
pub fn run_with_context(
    context: &CostContext,
    params0: &QaoaParams,
    optimiser: &Optimiser,
    epochs: usize,
    seed: u64,
) -> Result<RunOutcome, OptimError> {
    let start = Instant::now();
    let mut state = OptState::new(params0.clone(), optimiser, seed);
    record(context, &mut state, start)?;

    if let Optimiser::NelderMead { init_step } = optimiser {
        return nelder_mead::drive(context, state, *init_step, epochs, start);
    }

    for _ in 0..epochs {
        step(context, &mut state, optimiser)?;
        state.epoch += 1;
        record(context, &mut state, start)?;
    }
    Ok(finish(context, state))
}

fn finish(context: &CostContext, state: OptState) -> RunOutcome {
    let final_ratio = context.ratio(&state.params);
    RunOutcome { params: state.params, trace: state.trace, final_ratio, warnings: state.warnings }
}

fn record(context: &CostContext, state: &mut OptState, start: Instant) -> Result<(), OptimError> {
    let cost = context.cost(&state.params);
    if !cost.is_finite() {
        return Err(OptimError::NonFiniteCost { epoch: state.epoch });
    }
    state.trace.push(TraceRow {
        epoch: state.epoch,
        cost,
        ratio: -cost / context.optimum(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    Ok(())
}

fn step(context: &CostContext, state: &mut OptState, optimiser: &Optimiser) -> Result<(), OptimError> {
    let mut flat = state.params.flat();
    match optimiser {
        Optimiser::Sgd { lr } => {
            let grad = context.cost_gradient(&state.params);
            sgd_step(&mut flat, &grad, *lr);
        }
        Optimiser::Adam { lr } => {
            let grad = context.cost_gradient(&state.params);
            let Moments::FirstSecond { m, v, t } = &mut state.moments else { unreachable!() };
            *t += 1;
            adam_step(&mut flat, &grad, *lr, m, v, *t);
        }
        Optimiser::RmsProp { lr } => {
            let grad = context.cost_gradient(&state.params);
            let Moments::Second { v } = &mut state.moments else { unreachable!() };
            rmsprop_step(&mut flat, &grad, *lr, v);
        }
        Optimiser::Qng { lr, lambda } => {
            let warnings = qng::qng_step(context, &state.params, &mut flat, *lr, *lambda);
            state.warnings += warnings;
        }
        Optimiser::Mgd(cfg) => {
            let grad = mgd_surrogate_gradient(
                |x| context.cost_flat(x),
                &flat,
                cfg,
                &mut state.rng,
            )
            .map_err(OptimError::BadConfig)?;
            sgd_step(&mut flat, &grad, cfg.lr);
        }
        Optimiser::Spsa(cfg) => {
            let Moments::Preconditioned { smoothed } = &mut state.moments else { unreachable!() };
            let fallback = spsa::spsa_step(context, &mut flat, cfg, smoothed, &mut state.rng);
            state.warnings += fallback as usize;
        }
        Optimiser::NelderMead { .. } => unreachable!("driven separately"),
    }
    state.params = QaoaParams::from_flat(&flat)?;
    Ok(())
}
