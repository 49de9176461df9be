//! Model gradient descent: fit a local quadratic surrogate to cost samples
//! drawn in an L2 ball around the current point, then descend along the
//! surrogate's gradient at the centre.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::solve_spd;

#[derive(Debug, Clone)]
pub struct MgdConfig {
    /// Sampling radius of the trust region.
    pub radius: f64,
    /// Sample count; `None` means 3× the parameter dimension.
    pub samples: Option<usize>,
    pub lr: f64,
}

impl Default for MgdConfig {
    fn default() -> Self {
        Self { radius: 0.1, samples: None, lr: 0.05 }
    }
}

/// Surrogate gradient at `center`.
///
/// The quadratic fit solves ridge-regularised normal equations (the feature
/// matrix is often rank deficient at the default sample budget); when even
/// that factorisation fails the fit degrades to a linear surrogate, which is
/// always well posed at `samples ≥ dim + 2`.
pub fn mgd_surrogate_gradient(
    cost: impl Fn(&[f64]) -> f64,
    center: &[f64],
    cfg: &MgdConfig,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, String> {
    let d = center.len();
    if cfg.radius <= 0.0 {
        return Err("mgd radius must be positive".into());
    }
    let samples = cfg.samples.unwrap_or(3 * d);
    if samples < d + 2 {
        return Err(format!("mgd needs at least dim+2 = {} samples, got {samples}", d + 2));
    }

    // uniform in the ball: normalised Gaussian direction, radius ~ r u^{1/d}
    let mut deltas = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let scale = cfg.radius * rng.gen::<f64>().powf(1.0 / d as f64) / norm;
        for v in &mut dir {
            *v *= scale;
        }
        let point: Vec<f64> = center.iter().zip(&dir).map(|(c, v)| c + v).collect();
        values.push(cost(&point));
        deltas.push(dir);
    }

    if let Some(grad) = fit(&deltas, &values, d, true) {
        return Ok(grad);
    }
    fit(&deltas, &values, d, false).ok_or_else(|| "mgd surrogate fit failed".into())
}

/// Least-squares fit of `[1, δ, (δδ)_{i≤j}]` (or just `[1, δ]`) returning the
/// linear coefficients, which are the surrogate gradient at the centre.
fn fit(deltas: &[Vec<f64>], values: &[f64], d: usize, quadratic: bool) -> Option<Vec<f64>> {
    let quad_terms = if quadratic { d * (d + 1) / 2 } else { 0 };
    let features = 1 + d + quad_terms;
    let rows = deltas.len();
    let mut phi = Array2::zeros((rows, features));
    for (r, delta) in deltas.iter().enumerate() {
        phi[[r, 0]] = 1.0;
        for (k, &v) in delta.iter().enumerate() {
            phi[[r, 1 + k]] = v;
        }
        if quadratic {
            let mut c = 1 + d;
            for i in 0..d {
                for j in i..d {
                    phi[[r, c]] = delta[i] * delta[j];
                    c += 1;
                }
            }
        }
    }
    let y = Array1::from_iter(values.iter().copied());
    let mut normal = phi.t().dot(&phi);
    let rhs = phi.t().dot(&y);
    let ridge = 1e-12 * (1.0 + normal.diag().sum() / features as f64);
    for k in 0..features {
        normal[[k, k]] += ridge;
    }
    let coeffs = solve_spd(&normal, &rhs)?;
    if !coeffs.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(coeffs.iter().skip(1).take(d).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Graph;
    use crate::optim::{run_optimisation, Optimiser};
    use crate::qsim::{Init, QaoaParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recovers_the_gradient_of_an_exact_quadratic() {
        // cost = g·θ + 1/2 θ^T H θ around center 0: surrogate gradient = g
        let g = [2.0, -1.5];
        let cost = |x: &[f64]| {
            g[0] * x[0] + g[1] * x[1] + 0.7 * x[0] * x[0] - 0.3 * x[0] * x[1] + 0.2 * x[1] * x[1] + 5.0
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = MgdConfig { radius: 0.2, samples: Some(12), lr: 0.1 };
        let grad = mgd_surrogate_gradient(cost, &[0.0, 0.0], &cfg, &mut rng).unwrap();
        assert!((grad[0] - g[0]).abs() < 1e-6, "{grad:?}");
        assert!((grad[1] - g[1]).abs() < 1e-6, "{grad:?}");
    }

    #[test]
    fn gradient_correct_away_from_origin() {
        let cost = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = MgdConfig { radius: 0.15, samples: Some(10), lr: 0.1 };
        let center = [0.5, -1.0];
        let grad = mgd_surrogate_gradient(cost, &center, &cfg, &mut rng).unwrap();
        assert!((grad[0] - 2.0 * (center[0] - 1.0)).abs() < 1e-6);
        assert!((grad[1] - 6.0 * (center[1] + 2.0)).abs() < 1e-6);
    }

    #[test]
    fn zero_radius_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = MgdConfig { radius: 0.0, samples: None, lr: 0.1 };
        assert!(mgd_surrogate_gradient(|_| 0.0, &[0.0], &cfg, &mut rng).is_err());
    }

    #[test]
    fn undersampled_config_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = MgdConfig { radius: 0.1, samples: Some(3), lr: 0.1 };
        assert!(mgd_surrogate_gradient(|_| 0.0, &[0.0, 0.0], &cfg, &mut rng).is_err());
    }

    #[test]
    fn single_edge_qaoa_reaches_high_ratio() {
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        let params0 = QaoaParams::new(vec![0.2], vec![0.15]).unwrap();
        let optimiser = Optimiser::Mgd(MgdConfig { radius: 0.1, samples: None, lr: 0.2 });
        let out = run_optimisation(&g, &Init::Cold, &params0, &optimiser, 150, 4).unwrap();
        assert!(out.final_ratio >= 0.95, "ratio {}", out.final_ratio);
    }
}
