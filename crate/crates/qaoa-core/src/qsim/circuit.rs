//! Assembled QAOA circuits: `|ψ_{β,γ}⟩ = U_M(β_p) U_C(γ_p) ... U_M(β_1) U_C(γ_1) |init⟩`.

use num_complex::Complex64;

use super::gates::{apply_cost_phases, apply_mixer, apply_mixer_hamiltonian, cost_eigenvalues, Mixer};
use super::{prepare_plus_state, prepare_warmstart_state, QaoaParams, SimError, StateVector, MAX_QUBITS};
use crate::graphs::Graph;
use crate::init::WarmStart;

/// Initial state and mixer selection: a cold start (`|+⟩^n`, transverse-field
/// mixer) or a warm start (rotated product state and matching rotated mixer).
#[derive(Debug, Clone)]
pub enum Init {
    Cold,
    Warm(WarmStart),
}

/// A graph-specialised QAOA circuit with the diagonal cost precomputed.
///
/// Construction costs `O(2^n |E|)`; every subsequent state build is
/// `O(p 2^n)` plus one pass per expectation.
#[derive(Debug, Clone)]
pub struct QaoaCircuit {
    n: usize,
    cost_eigs: Vec<f64>,
    cut_diag: Vec<f64>,
    mixer: Mixer,
    init_state: StateVector,
}

impl QaoaCircuit {
    pub fn new(g: &Graph, init: &Init) -> Result<Self, SimError> {
        let n = g.n();
        if n == 0 || n > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n, cap: MAX_QUBITS });
        }
        let cost_eigs = cost_eigenvalues(g);
        let cut_diag: Vec<f64> = cost_eigs.iter().map(|e| e / 2.0).collect();
        let (mixer, init_state) = match init {
            Init::Cold => (Mixer::Standard, prepare_plus_state(n)?),
            Init::Warm(ws) => {
                let x = ws.x_tilde();
                if x.len() != n {
                    return Err(SimError::WarmStartLength { values: x.len(), qubits: n });
                }
                let (state, _pinned) = prepare_warmstart_state(ws)?;
                (Mixer::warm_from_x(&x), state)
            }
        };
        Ok(Self { n, cost_eigs, cut_diag, mixer, init_state })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    pub fn initial_state(&self) -> StateVector {
        self.init_state.clone()
    }

    /// Eigenvalues of the cut observable per basis state.
    pub fn cut_diagonal(&self) -> &[f64] {
        &self.cut_diag
    }

    /// Prepare `|ψ_{β,γ}⟩`.
    pub fn state(&self, params: &QaoaParams) -> StateVector {
        let mut s = self.init_state.clone();
        for layer in 0..params.p() {
            apply_cost_phases(&mut s, &self.cost_eigs, params.gammas()[layer]);
            apply_mixer(&mut s, &self.mixer, params.betas()[layer]);
        }
        s
    }

    /// Exact cut expectation `⟨ψ| cut |ψ⟩`.
    pub fn expectation(&self, params: &QaoaParams) -> f64 {
        self.state(params).diagonal_expectation(&self.cut_diag)
    }

    pub fn expectation_of(&self, state: &StateVector) -> f64 {
        state.diagonal_expectation(&self.cut_diag)
    }

    /// Fidelity `|⟨ψ_a|ψ_b⟩|^2` between two parameterisations of this circuit.
    pub fn fidelity(&self, a: &QaoaParams, b: &QaoaParams) -> f64 {
        self.state(a).overlap_sqr(&self.state(b))
    }

    /// Exact derivative statevectors `∂|ψ⟩/∂θ_k` for all 2p angles, in flat
    /// order `[γ_1..γ_p, β_1..β_p]`.
    ///
    /// Each derivative inserts the layer generator (`-i H_C` after `U_C(γ_k)`
    /// or `-i H_M` after `U_M(β_k)`) and evolves through the remaining layers.
    pub fn jacobian(&self, params: &QaoaParams) -> Vec<StateVector> {
        let p = params.p();
        let mut out = Vec::with_capacity(2 * p);
        for k in 0..p {
            out.push(self.derivative_state(params, k, true));
        }
        for k in 0..p {
            out.push(self.derivative_state(params, k, false));
        }
        out
    }

    fn derivative_state(&self, params: &QaoaParams, k: usize, wrt_gamma: bool) -> StateVector {
        let mut s = self.init_state.clone();
        for layer in 0..params.p() {
            apply_cost_phases(&mut s, &self.cost_eigs, params.gammas()[layer]);
            if wrt_gamma && layer == k {
                for (amp, &e) in s.amps_mut().iter_mut().zip(&self.cost_eigs) {
                    *amp *= Complex64::new(0.0, -e);
                }
            }
            apply_mixer(&mut s, &self.mixer, params.betas()[layer]);
            if !wrt_gamma && layer == k {
                let hs = apply_mixer_hamiltonian(&s, &self.mixer);
                for (amp, h) in s.amps_mut().iter_mut().zip(hs.amps()) {
                    *amp = Complex64::new(0.0, -1.0) * h;
                }
            }
        }
        s
    }

    /// Analytic gradient of the cut expectation, `∂⟨cut⟩/∂θ_k = 2 Re ⟨∂_k ψ| cut |ψ⟩`.
    pub fn gradient(&self, params: &QaoaParams) -> Vec<f64> {
        let psi = self.state(params);
        let jac = self.jacobian(params);
        jac.iter()
            .map(|dpsi| {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((d, a), &e) in dpsi.amps().iter().zip(psi.amps()).zip(&self.cut_diag) {
                    acc += d.conj() * a * e;
                }
                2.0 * acc.re
            })
            .collect()
    }
}

/// Cut expectation of the depth-p QAOA state on `g`.
pub fn qaoa_expectation(g: &Graph, params: &QaoaParams, init: &Init) -> Result<f64, SimError> {
    Ok(QaoaCircuit::new(g, init)?.expectation(params))
}

/// Fidelity between two parameter settings of the same circuit shape.
pub fn qaoa_fidelity(g: &Graph, a: &QaoaParams, b: &QaoaParams, init: &Init) -> Result<f64, SimError> {
    if a.p() != b.p() {
        return Err(SimError::BadLayerCount { p: a.p(), gammas: a.p(), betas: b.p() });
    }
    Ok(QaoaCircuit::new(g, init)?.fidelity(a, b))
}

/// Per-parameter derivative statevectors, flat order `[γ.., β..]`.
pub fn statevector_jacobian(g: &Graph, params: &QaoaParams, init: &Init) -> Result<Vec<StateVector>, SimError> {
    Ok(QaoaCircuit::new(g, init)?.jacobian(params))
}
