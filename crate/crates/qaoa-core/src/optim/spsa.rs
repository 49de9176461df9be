//! Simultaneous perturbation stochastic approximation.
//!
//! All three update rules share the random-direction gradient estimate
//! `∇̃C = [C(θ+εΔ) - C(θ-εΔ)]/(2ε) · Δ` with `Δ ~ uniform {-1,+1}^d`.
//! 2-SPSA preconditions it with a smoothed Hessian estimate built from the
//! four-point `δC` stencil; QN-SPSA swaps the stencil for fidelity
//! differences `δF`, estimating the Fubini-Study metric instead.
//!
//! The Hessian estimate carries the -1/2 prefactor exactly as printed in the
//! update rules it reproduces; that factor is what turns the fidelity
//! Hessian into the metric (F ≈ 1 - α^T g α), and for δC it flips the sign
//! of the curvature estimate, which the eigenvalue floor then clamps, so
//! 2-SPSA at the printed prefactor degenerates towards rescaled 1-SPSA.
//! `drop_half_prefactor` switches the δC rule to the textbook estimate.

use ndarray::Array2;
use rand::Rng;

use super::CostContext;
use crate::linalg::{solve_spd, symmetric_eigen};
use crate::qsim::QaoaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpsaVariant {
    One,
    Two,
    Qn,
}

impl SpsaVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpsaVariant::One => "1",
            SpsaVariant::Two => "2",
            SpsaVariant::Qn => "qn",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpsaConfig {
    pub variant: SpsaVariant,
    /// Finite-difference perturbation ε.
    pub eps: f64,
    pub lr: f64,
    /// Exponential smoothing factor for the preconditioner history.
    pub smoothing: f64,
    /// Eigenvalue floor applied before solving.
    pub eig_floor: f64,
    /// Use the textbook δC Hessian estimate instead of the printed -1/2 one.
    pub drop_half_prefactor: bool,
}

impl SpsaConfig {
    pub fn one_default() -> Self {
        Self {
            variant: SpsaVariant::One,
            eps: 0.1,
            lr: 0.02,
            smoothing: 0.9,
            eig_floor: 1e-3,
            drop_half_prefactor: false,
        }
    }

    pub fn two_default() -> Self {
        Self { variant: SpsaVariant::Two, ..Self::one_default() }
    }

    pub fn qn_default() -> Self {
        Self { variant: SpsaVariant::Qn, ..Self::one_default() }
    }
}

/// Four-point cost stencil
/// `C(θ+εΔ1+εΔ2) - C(θ+εΔ1) - C(θ-εΔ1+εΔ2) + C(θ-εΔ1)`.
pub fn delta_c_stencil(cost: impl Fn(&[f64]) -> f64, theta: &[f64], eps: f64, d1: &[f64], d2: &[f64]) -> f64 {
    let shift = |a: f64, b: f64| -> Vec<f64> {
        theta
            .iter()
            .zip(d1.iter().zip(d2))
            .map(|(t, (x1, x2))| t + eps * (a * x1 + b * x2))
            .collect()
    };
    cost(&shift(1.0, 1.0)) - cost(&shift(1.0, 0.0)) - cost(&shift(-1.0, 1.0)) + cost(&shift(-1.0, 0.0))
}

/// Four-point fidelity stencil `δF` with the first argument pinned at θ.
pub fn delta_f_stencil(
    fidelity: impl Fn(&[f64], &[f64]) -> f64,
    theta: &[f64],
    eps: f64,
    d1: &[f64],
    d2: &[f64],
) -> f64 {
    let shift = |a: f64, b: f64| -> Vec<f64> {
        theta
            .iter()
            .zip(d1.iter().zip(d2))
            .map(|(t, (x1, x2))| t + eps * (a * x1 + b * x2))
            .collect()
    };
    fidelity(theta, &shift(1.0, 1.0)) - fidelity(theta, &shift(1.0, 0.0))
        - fidelity(theta, &shift(-1.0, 1.0))
        + fidelity(theta, &shift(-1.0, 0.0))
}

fn rademacher(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn rank_two_sym(d1: &[f64], d2: &[f64]) -> Array2<f64> {
    let d = d1.len();
    Array2::from_shape_fn((d, d), |(i, j)| (d1[i] * d2[j] + d2[i] * d1[j]) / 2.0)
}

/// Floor the spectrum at `floor` and solve for the preconditioned direction;
/// `None` signals the identity fallback.
fn precondition(smoothed: &Array2<f64>, grad: &[f64], floor: f64) -> Option<Vec<f64>> {
    let (vals, vecs) = symmetric_eigen(smoothed);
    let floored = vals.mapv(|v| v.max(floor));
    let rebuilt = vecs.dot(&Array2::from_diag(&floored)).dot(&vecs.t());
    let g = ndarray::Array1::from_iter(grad.iter().copied());
    let x = solve_spd(&rebuilt, &g)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.to_vec())
    } else {
        None
    }
}

/// One SPSA update in place. Returns true when a non-positive-definite
/// preconditioner forced the identity fallback.
pub(crate) fn spsa_step(
    context: &CostContext,
    flat: &mut [f64],
    cfg: &SpsaConfig,
    smoothed: &mut Option<Array2<f64>>,
    rng: &mut impl Rng,
) -> bool {
    let d = flat.len();
    let d1 = rademacher(d, rng);
    let cost = |x: &[f64]| context.cost_flat(x);

    let shift1 = |sign: f64| -> Vec<f64> {
        flat.iter().zip(&d1).map(|(t, x)| t + sign * cfg.eps * x).collect()
    };
    let c_plus = cost(&shift1(1.0));
    let c_minus = cost(&shift1(-1.0));
    let slope = (c_plus - c_minus) / (2.0 * cfg.eps);
    let grad: Vec<f64> = d1.iter().map(|x| slope * x).collect();

    let mut fallback = false;
    let direction = match cfg.variant {
        SpsaVariant::One => grad,
        SpsaVariant::Two | SpsaVariant::Qn => {
            let d2 = rademacher(d, rng);
            let raw = match cfg.variant {
                SpsaVariant::Two => {
                    // reuses C(θ±εΔ1) from the gradient estimate
                    let c_pp = cost(
                        &flat
                            .iter()
                            .zip(d1.iter().zip(&d2))
                            .map(|(t, (x1, x2))| t + cfg.eps * (x1 + x2))
                            .collect::<Vec<_>>(),
                    );
                    let c_mp = cost(
                        &flat
                            .iter()
                            .zip(d1.iter().zip(&d2))
                            .map(|(t, (x1, x2))| t + cfg.eps * (-x1 + x2))
                            .collect::<Vec<_>>(),
                    );
                    let delta_c = c_pp - c_plus - c_mp + c_minus;
                    let prefactor = if cfg.drop_half_prefactor { 1.0 } else { -0.5 };
                    prefactor * delta_c / (2.0 * cfg.eps * cfg.eps)
                }
                SpsaVariant::Qn => {
                    let params = QaoaParams::from_flat(flat).expect("caller keeps flat well-formed");
                    let fid = |a: &[f64], b: &[f64]| {
                        debug_assert_eq!(a, flat);
                        context.fidelity(&params, &QaoaParams::from_flat(b).expect("shifted params"))
                    };
                    let delta_f = delta_f_stencil(fid, flat, cfg.eps, &d1, &d2);
                    -0.5 * delta_f / (2.0 * cfg.eps * cfg.eps)
                }
                SpsaVariant::One => unreachable!(),
            };
            let estimate = rank_two_sym(&d1, &d2) * raw;
            let blended = match smoothed.take() {
                Some(prev) => &prev * cfg.smoothing + &estimate * (1.0 - cfg.smoothing),
                None => estimate,
            };
            let direction = match precondition(&blended, &grad, cfg.eig_floor) {
                Some(x) => x,
                None => {
                    fallback = true;
                    grad
                }
            };
            *smoothed = Some(blended);
            direction
        }
    };

    for (p, dirk) in flat.iter_mut().zip(&direction) {
        *p -= cfg.lr * dirk;
    }
    fallback
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_spsa_points_downhill_on_a_bowl() {
        // mean step direction over many draws aligns with -θ for c = |θ|²
        let theta = [1.0, -0.8, 0.5, 0.3];
        let cost = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mean_cos = 0.0;
        for _ in 0..1000 {
            let d1 = rademacher(4, &mut rng);
            let plus: Vec<f64> = theta.iter().zip(&d1).map(|(t, x)| t + 0.1 * x).collect();
            let minus: Vec<f64> = theta.iter().zip(&d1).map(|(t, x)| t - 0.1 * x).collect();
            let slope = (cost(&plus) - cost(&minus)) / 0.2;
            let step: Vec<f64> = d1.iter().map(|x| -slope * x).collect();
            let dot: f64 = step.iter().zip(&theta).map(|(s, t)| s * -t).sum();
            let ns: f64 = step.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nt: f64 = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
            mean_cos += dot / (ns * nt).max(1e-12);
        }
        mean_cos /= 1000.0;
        assert!(mean_cos > 0.3, "mean cosine {mean_cos}");
    }

    #[test]
    fn gradient_estimator_is_unbiased_for_linear_costs() {
        // enumerate all 2^d sign vectors: the mean estimate is exact
        let a = [0.7, -1.3, 0.4, 2.0, -0.2, 0.9];
        let cost = |x: &[f64]| x.iter().zip(&a).map(|(v, c)| v * c).sum::<f64>();
        for d in [2usize, 4, 6] {
            let theta = vec![0.3; d];
            let mut mean = vec![0.0; d];
            for mask in 0..(1usize << d) {
                let delta: Vec<f64> = (0..d).map(|k| if (mask >> k) & 1 == 1 { 1.0 } else { -1.0 }).collect();
                let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, x)| t + 0.05 * x).collect();
                let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, x)| t - 0.05 * x).collect();
                let slope = (cost(&plus[..]) - cost(&minus[..])) / 0.1;
                for k in 0..d {
                    mean[k] += slope * delta[k];
                }
            }
            for k in 0..d {
                mean[k] /= (1usize << d) as f64;
                assert!((mean[k] - a[k]).abs() < 1e-12, "component {k}: {} vs {}", mean[k], a[k]);
            }
        }
    }

    #[test]
    fn delta_f_stencil_vanishes_at_zero_second_direction() {
        let fid = |_: &[f64], b: &[f64]| 1.0 - b.iter().map(|v| v * v).sum::<f64>();
        let theta = [0.2, -0.4];
        let d1 = [1.0, -1.0];
        let d2 = [0.0, 0.0];
        let df = delta_f_stencil(fid, &theta, 0.1, &d1, &d2);
        assert_eq!(df, 0.0);
    }

    #[test]
    fn delta_c_stencil_estimates_curvature() {
        // quadratic cost: δC = 2ε² Δ1ᵀ H Δ2 exactly
        let h = [[2.0, 0.5], [0.5, 1.0]];
        let cost = |x: &[f64]| {
            0.5 * (h[0][0] * x[0] * x[0] + 2.0 * h[0][1] * x[0] * x[1] + h[1][1] * x[1] * x[1])
        };
        let theta = [0.3, -0.2];
        let d1 = [1.0, -1.0];
        let d2 = [1.0, 1.0];
        let eps = 0.05;
        let dc = delta_c_stencil(cost, &theta, eps, &d1, &d2);
        let expected = 2.0
            * eps
            * eps
            * (d1[0] * (h[0][0] * d2[0] + h[0][1] * d2[1]) + d1[1] * (h[1][0] * d2[0] + h[1][1] * d2[1]));
        assert!((dc - expected).abs() < 1e-12);
    }

    #[test]
    fn eigen_floor_makes_the_solve_succeed() {
        let m = Array2::from_shape_fn((3, 3), |(i, j)| -((i + j) as f64)); // indefinite
        let dir = precondition(&m, &[1.0, 2.0, 3.0], 1e-3);
        assert!(dir.is_some());
        assert!(dir.unwrap().iter().all(|v| v.is_finite()));
    }
}
