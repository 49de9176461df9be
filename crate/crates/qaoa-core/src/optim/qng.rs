//! Quantum natural gradient: the Fubini-Study metric
//! `g_ij = Re{⟨∂_iψ|∂_jψ⟩ - ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩}` and the preconditioned
//! update `θ ← θ - lr (g + λI)^{-1} ∇C`.

use ndarray::Array2;

use super::CostContext;
use crate::linalg::solve_spd;
use crate::graphs::Graph;
use crate::qsim::{Init, QaoaCircuit, QaoaParams, SimError};

/// Metric tensor from the analytic jacobian; symmetrised against roundoff.
pub fn qfi_of_circuit(circuit: &QaoaCircuit, params: &QaoaParams) -> Array2<f64> {
    let psi = circuit.state(params);
    let jac = circuit.jacobian(params);
    let d = jac.len();
    let overlaps: Vec<num_complex::Complex64> = jac.iter().map(|dp| dp.inner(&psi)).collect();
    let mut g = Array2::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let term = jac[i].inner(&jac[j]) - overlaps[i].conj() * overlaps[j];
            g[[i, j]] = term.re;
            g[[j, i]] = term.re;
        }
    }
    g
}

/// Metric tensor of the QAOA circuit on `g` at `params`.
pub fn qfi_matrix(graph: &Graph, params: &QaoaParams, init: &Init) -> Result<Array2<f64>, SimError> {
    Ok(qfi_of_circuit(&QaoaCircuit::new(graph, init)?, params))
}

/// Solve `(metric + λI) d = grad`, escalating λ tenfold when the
/// factorisation fails; the identity direction is the last resort. Returns
/// the direction and how many escalations fired.
pub(crate) fn preconditioned_direction(metric: &Array2<f64>, grad: &[f64], lambda: f64) -> (Vec<f64>, usize) {
    let d = grad.len();
    let g = ndarray::Array1::from_iter(grad.iter().copied());
    let mut reg = lambda.max(0.0);
    for attempt in 0..6 {
        let mut m = metric.clone();
        for k in 0..d {
            m[[k, k]] += reg;
        }
        if let Some(x) = solve_spd(&m, &g) {
            if x.iter().all(|v| v.is_finite()) {
                return (x.to_vec(), attempt);
            }
        }
        reg = if reg == 0.0 { 1e-6 } else { reg * 10.0 };
    }
    (grad.to_vec(), 6)
}

pub(crate) fn qng_step(
    context: &CostContext,
    params: &QaoaParams,
    flat: &mut [f64],
    lr: f64,
    lambda: f64,
) -> usize {
    let grad = context.cost_gradient(params);
    let metric = qfi_of_circuit(context.circuit(), params);
    let (direction, warnings) = preconditioned_direction(&metric, &grad, lambda);
    for (p, d) in flat.iter_mut().zip(&direction) {
        *p -= lr * d;
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::random_regular;
    use crate::init::WarmStart;
    use crate::linalg::symmetric_eigen;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_params(p: usize, rng: &mut StdRng) -> QaoaParams {
        QaoaParams::new(
            (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    /// -1/2 × central finite-difference Hessian of F(θ, θ+α) at α = 0.
    fn fd_metric(circuit: &QaoaCircuit, params: &QaoaParams, h: f64) -> Array2<f64> {
        let flat = params.flat();
        let d = flat.len();
        let fid = |alpha: &[f64]| {
            let shifted: Vec<f64> = flat.iter().zip(alpha).map(|(a, b)| a + b).collect();
            circuit.fidelity(params, &QaoaParams::from_flat(&shifted).unwrap())
        };
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                let mut app = vec![0.0; d];
                app[i] += h;
                app[j] += h;
                let mut apm = vec![0.0; d];
                apm[i] += h;
                apm[j] -= h;
                let mut amp = vec![0.0; d];
                amp[i] -= h;
                amp[j] += h;
                let mut amm = vec![0.0; d];
                amm[i] -= h;
                amm[j] -= h;
                let hess = (fid(&app) - fid(&apm) - fid(&amp) + fid(&amm)) / (4.0 * h * h);
                m[[i, j]] = -0.5 * hess;
            }
        }
        m
    }

    #[test]
    fn qfi_matches_fd_fidelity_hessian() {
        let mut rng = StdRng::seed_from_u64(17);
        let g = random_regular(6, 3, 0).unwrap();
        let warm = WarmStart::new((0..6).map(|_| rng.gen_range(0.1..0.9)).collect(), 0.1).unwrap();
        for init in [Init::Cold, Init::Warm(warm)] {
            let circuit = QaoaCircuit::new(&g, &init).unwrap();
            let params = rand_params(1, &mut rng);
            let qfi = qfi_of_circuit(&circuit, &params);
            let fd = fd_metric(&circuit, &params, 2e-4);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (qfi[[i, j]] - fd[[i, j]]).abs() < 1e-5,
                        "({i},{j}): {} vs {}",
                        qfi[[i, j]],
                        fd[[i, j]]
                    );
                }
            }
        }
    }

    #[test]
    fn qfi_is_psd_even_with_redundant_directions() {
        // an edgeless graph makes every γ generator act trivially, so the
        // metric is rank deficient; eigenvalues must still clear -1e-10
        let g = crate::graphs::Graph::unweighted(3, []).unwrap();
        let params = QaoaParams::new(vec![0.3, 0.1], vec![0.2, -0.4]).unwrap();
        let qfi = qfi_matrix(&g, &params, &Init::Cold).unwrap();
        let (vals, _) = symmetric_eigen(&qfi);
        assert!(vals.iter().all(|&v| v > -1e-10), "{vals:?}");
        assert!(vals[0].abs() < 1e-10, "expected a null direction");
    }

    #[test]
    fn qfi_psd_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(23);
        for seed in 0..5 {
            let g = random_regular(8, 3, seed).unwrap();
            let qfi = qfi_matrix(&g, &rand_params(3, &mut rng), &Init::Cold).unwrap();
            let (vals, _) = symmetric_eigen(&qfi);
            assert!(vals.iter().all(|&v| v > -1e-10));
        }
    }

    #[test]
    fn identity_metric_reduces_to_sgd() {
        let metric = Array2::eye(4);
        let grad = vec![1.0, -2.0, 0.5, 0.0];
        let (dir, warnings) = preconditioned_direction(&metric, &grad, 0.0);
        assert_eq!(warnings, 0);
        for (d, g) in dir.iter().zip(&grad) {
            assert!((d - g).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_metric_is_regularised_without_nans() {
        let metric = Array2::zeros((3, 3));
        let grad = vec![1.0, 1.0, 1.0];
        let (dir, _) = preconditioned_direction(&metric, &grad, 1e-3);
        assert!(dir.iter().all(|v| v.is_finite()));

        // end to end on the degenerate circuit
        let g = crate::graphs::Graph::unweighted(2, []).unwrap();
        let context = CostContext::new(&g, &Init::Cold).unwrap();
        let params = QaoaParams::zeros(1);
        let mut flat = params.flat();
        qng_step(&context, &params, &mut flat, 0.1, 1e-3);
        assert!(flat.iter().all(|v| v.is_finite()));
    }
}
