//! Gate kernels: diagonal cost phases and single-qubit mixer rotations.

use num_complex::Complex64;

use super::{SimError, StateVector};
use crate::graphs::Graph;

/// Mixer selection for a layer.
///
/// The warm variant carries one `(hz, hx)` pair per qubit with
/// `H_i = hz Z + hx X`, `hz = 2x_i - 1`, `hx = -2 √(x_i (1 - x_i))`. Both
/// variants square to the identity per qubit, so
/// `e^{-iβH} = cos β · I - i sin β · H` holds exactly.
#[derive(Debug, Clone)]
pub enum Mixer {
    Standard,
    WarmStart { axes: Vec<(f64, f64)> },
}

impl Mixer {
    /// Per-qubit mixer Hamiltonians from relaxed values `x ∈ [0,1]^n`.
    pub fn warm_from_x(x: &[f64]) -> Self {
        let axes = x.iter().map(|&xi| (2.0 * xi - 1.0, -2.0 * (xi * (1.0 - xi)).sqrt())).collect();
        Mixer::WarmStart { axes }
    }
}

/// Apply a 2x2 matrix to one qubit of the state, in place.
pub(crate) fn apply_single_qubit(state: &mut StateVector, qubit: usize, m: &[[Complex64; 2]; 2]) {
    let stride = 1usize << qubit;
    let amps = state.amps_mut();
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for off in 0..stride {
            let i0 = base + off;
            let i1 = i0 + stride;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

/// Eigenvalues of the cost Hamiltonian `H_C = Σ w_ij (1 - Z_i Z_j)` on each
/// basis state; equals twice the cut of the corresponding bit assignment.
pub(crate) fn cost_eigenvalues(g: &Graph) -> Vec<f64> {
    let dim = 1usize << g.n();
    let mut eigs = vec![0.0; dim];
    for &(i, j, w) in g.edges() {
        for (s, e) in eigs.iter_mut().enumerate() {
            if ((s >> i) ^ (s >> j)) & 1 == 1 {
                *e += 2.0 * w;
            }
        }
    }
    eigs
}

pub(crate) fn apply_cost_phases(state: &mut StateVector, eigs: &[f64], gamma: f64) {
    for (amp, &e) in state.amps_mut().iter_mut().zip(eigs) {
        *amp *= Complex64::from_polar(1.0, -gamma * e);
    }
}

/// Cost-layer unitary `U_C(γ) = e^{-iγ H_C}` applied to a state.
pub fn apply_cost_layer(state: &mut StateVector, g: &Graph, gamma: f64) -> Result<(), SimError> {
    if g.n() != state.n() {
        return Err(SimError::SizeMismatch { qubits: state.n(), nodes: g.n() });
    }
    let eigs = cost_eigenvalues(g);
    apply_cost_phases(state, &eigs, gamma);
    Ok(())
}

pub(crate) fn apply_mixer(state: &mut StateVector, mixer: &Mixer, beta: f64) {
    let c = Complex64::new(beta.cos(), 0.0);
    let s = beta.sin();
    match mixer {
        Mixer::Standard => {
            // e^{-iβX} = cos β I - i sin β X, one R_x(2β) per qubit
            let m = [[c, Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), c]];
            for q in 0..state.n() {
                apply_single_qubit(state, q, &m);
            }
        }
        Mixer::WarmStart { axes } => {
            for (q, &(hz, hx)) in axes.iter().enumerate() {
                let m = [
                    [c - Complex64::new(0.0, s * hz), -Complex64::new(0.0, s * hx)],
                    [-Complex64::new(0.0, s * hx), c + Complex64::new(0.0, s * hz)],
                ];
                apply_single_qubit(state, q, &m);
            }
        }
    }
}

/// Mixer-layer unitary `U_M(β) = e^{-iβ H_M}` applied to a state.
pub fn apply_mixer_layer(state: &mut StateVector, mixer: &Mixer, beta: f64) -> Result<(), SimError> {
    if let Mixer::WarmStart { axes } = mixer {
        if axes.len() != state.n() {
            return Err(SimError::WarmStartLength { values: axes.len(), qubits: state.n() });
        }
    }
    apply_mixer(state, mixer, beta);
    Ok(())
}

/// Apply `e^{-i·angle·H_q}` for one qubit's mixer term only. Used by the
/// per-term parameter-shift rule.
pub(crate) fn apply_single_qubit_mixer(state: &mut StateVector, mixer: &Mixer, qubit: usize, angle: f64) {
    let c = Complex64::new(angle.cos(), 0.0);
    let s = angle.sin();
    let (hz, hx) = match mixer {
        Mixer::Standard => (0.0, 1.0),
        Mixer::WarmStart { axes } => axes[qubit],
    };
    let m = [
        [c - Complex64::new(0.0, s * hz), -Complex64::new(0.0, s * hx)],
        [-Complex64::new(0.0, s * hx), c + Complex64::new(0.0, s * hz)],
    ];
    apply_single_qubit(state, qubit, &m);
}

/// `H_M |ψ⟩` for the given mixer (sum over per-qubit terms). Used by the
/// analytic jacobian.
pub(crate) fn apply_mixer_hamiltonian(state: &StateVector, mixer: &Mixer) -> StateVector {
    let n = state.n();
    let dim = 1usize << n;
    let amps = state.amps();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    match mixer {
        Mixer::Standard => {
            for q in 0..n {
                let bit = 1usize << q;
                for s in 0..dim {
                    out[s] += amps[s ^ bit];
                }
            }
        }
        Mixer::WarmStart { axes } => {
            for (q, &(hz, hx)) in axes.iter().enumerate() {
                let bit = 1usize << q;
                for s in 0..dim {
                    let zsign = if s & bit == 0 { 1.0 } else { -1.0 };
                    out[s] += hz * zsign * amps[s] + hx * amps[s ^ bit];
                }
            }
        }
    }
    StateVector::from_amplitudes(n, out).expect("same size as input")
}
