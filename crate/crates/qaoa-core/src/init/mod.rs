//! Initialisation strategies: warm-start regularisation, Trotterised
//! quantum annealing schedules, Xavier angle initialisation and the SDP
//! relaxation with hyperplane rounding.

mod gw;

pub use gw::{default_rank, gw_relaxation, GwOutcome};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qsim::QaoaParams;

/// Default regularisation when warm-starting from hard 0/1 roundings:
/// midpoint of the admissible range [0, 0.5].
pub const DEFAULT_EPSILON: f64 = 0.25;

/// Default TQA time step for 3-regular graphs.
pub const DEFAULT_TQA_DT: f64 = 0.75;

#[derive(Debug, Error)]
pub enum InitError {
    #[error("relaxed values must lie in [0,1], got {value} at index {index}")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("epsilon must lie in [0, 0.5], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("warm start parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Where a warm start came from; stamped into the export format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmStartSource {
    Gw,
    Gnn,
    Manual,
}

impl WarmStartSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            WarmStartSource::Gw => "gw",
            WarmStartSource::Gnn => "gnn",
            WarmStartSource::Manual => "manual",
        }
    }

    fn parse(tok: &str) -> Option<Self> {
        match tok {
            "gw" => Some(WarmStartSource::Gw),
            "gnn" => Some(WarmStartSource::Gnn),
            "manual" => Some(WarmStartSource::Manual),
            _ => None,
        }
    }
}

/// A relaxed solution `x* ∈ [0,1]^n` with ε-regularisation.
///
/// The clamped values `x̃_i = clamp(x_i, ε, 1-ε)` keep every qubit rotation
/// away from the poles so the cost Hamiltonian still acts on it; the derived
/// angles are `θ_i = 2 asin(√x̃_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    x_star: Vec<f64>,
    epsilon: f64,
    source: WarmStartSource,
}

impl WarmStart {
    pub fn new(x_star: Vec<f64>, epsilon: f64) -> Result<Self, InitError> {
        Self::with_source(x_star, epsilon, WarmStartSource::Manual)
    }

    pub fn with_source(x_star: Vec<f64>, epsilon: f64, source: WarmStartSource) -> Result<Self, InitError> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(InitError::EpsilonOutOfRange(epsilon));
        }
        for (index, &value) in x_star.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(InitError::ValueOutOfRange { index, value });
            }
        }
        Ok(Self { x_star, epsilon, source })
    }

    pub fn n(&self) -> usize {
        self.x_star.len()
    }

    /// Raw relaxed values before clamping.
    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn source(&self) -> WarmStartSource {
        self.source
    }

    /// ε-clamped values `x̃_i ∈ [ε, 1-ε]`.
    pub fn x_tilde(&self) -> Vec<f64> {
        self.x_star.iter().map(|&x| x.clamp(self.epsilon, 1.0 - self.epsilon)).collect()
    }

    /// Rotation angles `θ_i = 2 asin(√x̃_i)`.
    pub fn thetas(&self) -> Vec<f64> {
        self.x_tilde().iter().map(|&x| 2.0 * x.sqrt().asin()).collect()
    }

    /// Export format: a header carrying ε and provenance, then one
    /// `i x_star theta` line per node.
    pub fn to_text(&self) -> String {
        let mut out = format!("# warmstart v1 epsilon={:e} source={}\n", self.epsilon, self.source.as_str());
        for (i, (&x, theta)) in self.x_star.iter().zip(self.thetas()).enumerate() {
            out.push_str(&format!("{i} {x:e} {theta:e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, InitError> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
        let (line, header) = lines.next().ok_or(InitError::Parse { line: 1, msg: "empty file".into() })?;
        let mut epsilon = None;
        let mut source = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("epsilon=") {
                epsilon = v.parse::<f64>().ok();
            } else if let Some(v) = tok.strip_prefix("source=") {
                source = WarmStartSource::parse(v);
            }
        }
        let epsilon = epsilon.ok_or(InitError::Parse { line, msg: "missing epsilon".into() })?;
        let source = source.ok_or(InitError::Parse { line, msg: "missing source".into() })?;
        let mut x = Vec::new();
        for (line, l) in lines {
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let mut it = l.split_whitespace();
            let _idx = it.next();
            let value = it
                .next()
                .ok_or(InitError::Parse { line, msg: "missing x_star".into() })?
                .parse::<f64>()
                .map_err(|e| InitError::Parse { line, msg: format!("{e}") })?;
            x.push(value);
        }
        Self::with_source(x, epsilon, source)
    }
}

/// Clamp a relaxed solution into `[ε, 1-ε]` and derive the rotation angles.
pub fn regularise(x_star: &[f64], epsilon: f64) -> Result<WarmStart, InitError> {
    WarmStart::new(x_star.to_vec(), epsilon)
}

/// Trotterised-quantum-annealing schedule of depth p with time step δt.
#[derive(Debug, Clone, Copy)]
pub struct TqaSchedule {
    pub p: usize,
    pub dt: f64,
}

impl TqaSchedule {
    pub fn params(&self) -> QaoaParams {
        let p = self.p as f64;
        let gammas = (1..=self.p).map(|k| k as f64 / p * self.dt).collect();
        let betas = (1..=self.p).map(|k| (1.0 - k as f64 / p) * self.dt).collect();
        QaoaParams::new(gammas, betas).expect("schedule angles are finite")
    }
}

/// Annealing-inspired linear schedule `γ_k = (k/p) δt`, `β_k = (1 - k/p) δt`.
pub fn tqa_init(p: usize, dt: f64) -> Result<QaoaParams, InitError> {
    if p == 0 {
        return Err(InitError::ZeroDepth);
    }
    if dt <= 0.0 {
        return Err(InitError::NonPositiveTimeStep(dt));
    }
    Ok(TqaSchedule { p, dt }.params())
}

/// Xavier-style angle initialisation: all 2p angles drawn i.i.d. uniform on
/// `(-√(6/(2p+2)), +√(6/(2p+2)))`, treating fan-in = fan-out = p+1.
pub fn xavier_init(p: usize, seed: u64) -> Result<QaoaParams, InitError> {
    if p == 0 {
        return Err(InitError::ZeroDepth);
    }
    let bound = (6.0 / (2.0 * p as f64 + 2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_: usize| rng.gen_range(-bound..bound);
    let gammas: Vec<f64> = (0..p).map(&mut draw).collect();
    let betas: Vec<f64> = (0..p).map(&mut draw).collect();
    Ok(QaoaParams::new(gammas, betas).expect("draws are finite"))
}
