//! Dense statevector simulation of QAOA circuits.
//!
//! Qubit 0 is the least significant bit of the basis index. All expectations
//! are exact (no shot sampling); the cost observable is the cut operator
//! `1/2 Σ w_ij (1 - Z_i Z_j)`, whose eigenvalue on a basis state is the cut
//! of the corresponding bit assignment.

mod circuit;
pub(crate) mod gates;

pub use circuit::{qaoa_expectation, qaoa_fidelity, statevector_jacobian, Init, QaoaCircuit};
pub use gates::{apply_cost_layer, apply_mixer_layer, Mixer};

use num_complex::Complex64;
use thiserror::Error;

use crate::init::WarmStart;

/// Amplitude cap: 2^20 complex doubles is 16 MiB per state.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulator capped at {cap} qubits, requested {n}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("graph has {nodes} nodes but the state has {qubits} qubits")]
    SizeMismatch { qubits: usize, nodes: usize },
    #[error("parameter vectors must both have length p={p}, got {gammas} gammas and {betas} betas")]
    BadLayerCount { p: usize, gammas: usize, betas: usize },
    #[error("angles must be finite")]
    NonFiniteAngle,
    #[error("warm start has {values} entries for {qubits} qubits")]
    WarmStartLength { values: usize, qubits: usize },
}

/// The 2p trainable angles of a depth-p QAOA circuit.
///
/// The flat layout used for gradients and metric tensors is
/// `[γ_1..γ_p, β_1..β_p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self, SimError> {
        if gammas.len() != betas.len() {
            return Err(SimError::BadLayerCount { p: gammas.len(), gammas: gammas.len(), betas: betas.len() });
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(SimError::NonFiniteAngle);
        }
        Ok(Self { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        Self { gammas: vec![0.0; p], betas: vec![0.0; p] }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Flat view `[γ_1..γ_p, β_1..β_p]`.
    pub fn flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self, SimError> {
        let p = flat.len() / 2;
        if flat.len() != 2 * p {
            return Err(SimError::BadLayerCount { p, gammas: flat.len(), betas: 0 });
        }
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }
}

/// Complex amplitude vector over n qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self, SimError> {
        if n > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n, cap: MAX_QUBITS });
        }
        assert_eq!(amps.len(), 1 << n, "amplitude count must be 2^n");
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.n, other.n);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|^2`.
    pub fn overlap_sqr(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Expectation of a diagonal observable given by its basis eigenvalues.
    pub fn diagonal_expectation(&self, eigs: &[f64]) -> f64 {
        debug_assert_eq!(eigs.len(), self.amps.len());
        self.amps.iter().zip(eigs).map(|(a, &e)| a.norm_sqr() * e).sum()
    }

    /// `⟨Z_i Z_j⟩` on this state.
    pub fn zz_expectation(&self, i: usize, j: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(s, a)| {
                let sign = if ((s >> i) ^ (s >> j)) & 1 == 1 { -1.0 } else { 1.0 };
                sign * a.norm_sqr()
            })
            .sum()
    }
}

/// `|+⟩^{⊗n}`: the uniform superposition used by cold-started QAOA.
pub fn prepare_plus_state(n: usize) -> Result<StateVector, SimError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(SimError::TooManyQubits { n, cap: MAX_QUBITS });
    }
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    StateVector::from_amplitudes(n, vec![amp; dim])
}

/// Warm-started product state `⊗_i R_y(θ_i)|0⟩` with `θ_i = 2 asin(√x_i)`.
///
/// Returns the state and the indices of any qubit whose relaxed value sits
/// exactly at 0 or 1: such qubits are pinned to a basis state, commute with
/// the cost Hamiltonian, and usually indicate a missing ε-regularisation.
pub fn prepare_warmstart_state(ws: &WarmStart) -> Result<(StateVector, Vec<usize>), SimError> {
    let x = ws.x_tilde();
    let n = x.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(SimError::TooManyQubits { n, cap: MAX_QUBITS });
    }
    let dim = 1usize << n;
    let mut amps = vec![Complex64::new(1.0, 0.0); dim];
    for (q, &xq) in x.iter().enumerate() {
        let a0 = (1.0 - xq).sqrt();
        let a1 = xq.sqrt();
        for (s, amp) in amps.iter_mut().enumerate() {
            *amp *= if (s >> q) & 1 == 0 { a0 } else { a1 };
        }
    }
    let pinned = x
        .iter()
        .enumerate()
        .filter(|(_, &xq)| xq == 0.0 || xq == 1.0)
        .map(|(q, _)| q)
        .collect();
    Ok((StateVector::from_amplitudes(n, amps)?, pinned))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::WarmStart;

    #[test]
    fn plus_state_amplitudes() {
        let s = prepare_plus_state(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amps()[0].re - r).abs() < 1e-15);
        assert!((s.amps()[1].re - r).abs() < 1e-15);

        let s2 = prepare_plus_state(2).unwrap();
        assert!(s2.amps().iter().all(|a| (a.re - 0.5).abs() < 1e-15 && a.im == 0.0));
    }

    #[test]
    fn plus_state_has_no_zz_correlations() {
        let s = prepare_plus_state(10).unwrap();
        for i in 0..10 {
            for j in (i + 1)..10 {
                assert!(s.zz_expectation(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn size_cap_enforced() {
        assert!(matches!(prepare_plus_state(MAX_QUBITS + 1), Err(SimError::TooManyQubits { .. })));
    }

    #[test]
    fn warmstart_at_half_is_plus_state() {
        let ws = WarmStart::new(vec![0.5; 3], 0.0).unwrap();
        let (s, pinned) = prepare_warmstart_state(&ws).unwrap();
        assert!(pinned.is_empty());
        let plus = prepare_plus_state(3).unwrap();
        assert!((s.overlap_sqr(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warmstart_hard_bits_pin_basis_state() {
        // x = (1, 0): qubit 0 in |1⟩, qubit 1 in |0⟩, i.e. basis index 1
        let ws = WarmStart::new(vec![1.0, 0.0], 0.0).unwrap();
        let (s, pinned) = prepare_warmstart_state(&ws).unwrap();
        assert_eq!(pinned, vec![0, 1]);
        assert!((s.amps()[1].re - 1.0).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn warmstart_quarter_amplitudes() {
        // single qubit at x = 0.25: θ = 2 asin(1/2) = π/3, amplitudes (cos θ/2, sin θ/2)
        let ws = WarmStart::new(vec![0.25], 0.0).unwrap();
        let (s, _) = prepare_warmstart_state(&ws).unwrap();
        assert!((s.amps()[0].re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((s.amps()[1].re - 0.25f64.sqrt()).abs() < 1e-15);
        let theta = ws.thetas()[0];
        assert!((theta - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn params_flat_round_trip() {
        let p = QaoaParams::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        let q = QaoaParams::from_flat(&p.flat()).unwrap();
        assert_eq!(p, q);
        assert!(QaoaParams::new(vec![0.0], vec![]).is_err());
        assert!(QaoaParams::new(vec![f64::NAN], vec![0.0]).is_err());
    }
}
