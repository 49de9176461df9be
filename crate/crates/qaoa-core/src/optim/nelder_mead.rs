//! Nelder-Mead simplex minimisation, the gradient-free comparator.
//!
//! Standard reflect / expand / contract / shrink with α=1, γ=2, ρ=1/2,
//! σ=1/2. Ordering uses a stable sort on total order, so ties break by
//! insertion age and runs are deterministic.

use std::time::Instant;

use super::{finish, CostContext, OptState, OptimError, RunOutcome};
use crate::qsim::QaoaParams;

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    /// Offset added per coordinate to build the initial simplex.
    pub init_step: f64,
    /// Cost-evaluation budget.
    pub max_evals: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self { init_step: 0.25, max_evals: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct NmOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub evals: usize,
    /// True when the run stopped on the budget rather than simplex collapse.
    pub budget_exhausted: bool,
}

struct Simplex {
    points: Vec<(Vec<f64>, f64)>,
    evals: usize,
}

impl Simplex {
    fn new(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64) -> Self {
        let mut points = Vec::with_capacity(x0.len() + 1);
        points.push((x0.to_vec(), f(x0)));
        for i in 0..x0.len() {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = f(&x);
            points.push((x, v));
        }
        let evals = x0.len() + 1;
        let mut s = Self { points, evals };
        s.sort();
        s
    }

    fn sort(&mut self) {
        self.points.sort_by(|a, b| a.1.total_cmp(&b.1));
    }

    fn diameter(&self) -> f64 {
        let best = &self.points[0].0;
        self.points
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// One reflect/expand/contract/shrink round.
    fn iterate(&mut self, f: &mut impl FnMut(&[f64]) -> f64) {
        const ALPHA: f64 = 1.0;
        const GAMMA: f64 = 2.0;
        const RHO: f64 = 0.5;
        const SIGMA: f64 = 0.5;

        let n = self.points[0].0.len();
        let worst = self.points.len() - 1;
        let centroid: Vec<f64> = (0..n)
            .map(|k| self.points[..worst].iter().map(|(x, _)| x[k]).sum::<f64>() / worst as f64)
            .collect();

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&self.points[worst].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = blend(ALPHA);
        let fr = f(&reflected);
        self.evals += 1;

        if fr < self.points[0].1 {
            let expanded = blend(GAMMA);
            let fe = f(&expanded);
            self.evals += 1;
            self.points[worst] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < self.points[worst - 1].1 {
            self.points[worst] = (reflected, fr);
        } else {
            let contracted = if fr < self.points[worst].1 { blend(RHO) } else { blend(-RHO) };
            let fc = f(&contracted);
            self.evals += 1;
            if fc < self.points[worst].1.min(fr) {
                self.points[worst] = (contracted, fc);
            } else {
                // shrink towards the best vertex
                let best = self.points[0].0.clone();
                for (x, v) in self.points.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + SIGMA * (*xi - bi);
                    }
                    *v = f(x);
                    self.evals += 1;
                }
            }
        }
        self.sort();
    }
}

/// Minimise a black-box function from `x0`, bounded by an evaluation budget.
pub fn nelder_mead_minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    options: NmOptions,
) -> NmOutcome {
    let mut simplex = Simplex::new(&mut f, x0, options.init_step);
    let mut budget_exhausted = true;
    while simplex.evals < options.max_evals {
        simplex.iterate(&mut f);
        if simplex.diameter() < 1e-12 {
            budget_exhausted = false;
            break;
        }
    }
    let (best, best_value) = simplex.points[0].clone();
    NmOutcome { best, best_value, evals: simplex.evals, budget_exhausted }
}

/// Harness driver: one simplex iteration per epoch, trace rows at the best
/// vertex.
pub(crate) fn drive(
    context: &CostContext,
    mut state: OptState,
    init_step: f64,
    epochs: usize,
    start: Instant,
) -> Result<RunOutcome, OptimError> {
    let mut f = |x: &[f64]| context.cost_flat(x);
    let mut simplex = Simplex::new(&mut f, &state.params.flat(), init_step);
    for _ in 0..epochs {
        simplex.iterate(&mut f);
        state.params = QaoaParams::from_flat(&simplex.points[0].0)?;
        state.epoch += 1;
        super::record(context, &mut state, start)?;
    }
    Ok(finish(context, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Graph;
    use crate::optim::{run_optimisation, Optimiser};
    use crate::qsim::Init;

    #[test]
    fn quadratic_bowl_converges_fast() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let out = nelder_mead_minimize(f, &[0.0, 0.0], NmOptions { init_step: 0.5, max_evals: 200 });
        assert!((out.best[0] - 1.0).abs() < 1e-4, "{:?}", out.best);
        assert!((out.best[1] + 2.0).abs() < 1e-4);
        assert!(out.evals <= 200);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let out = nelder_mead_minimize(f, &[5.0, 5.0, 5.0], NmOptions { init_step: 0.1, max_evals: 12 });
        assert!(out.budget_exhausted);
        assert!(out.best_value.is_finite());
    }

    #[test]
    fn single_edge_qaoa_reaches_high_ratio() {
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        let params0 = crate::qsim::QaoaParams::new(vec![0.2], vec![0.2]).unwrap();
        let out = run_optimisation(&g, &Init::Cold, &params0, &Optimiser::NelderMead { init_step: 0.4 }, 120, 0).unwrap();
        assert!(out.final_ratio >= 0.99, "ratio {}", out.final_ratio);
    }

    #[test]
    fn runs_are_deterministic() {
        let f = |x: &[f64]| (x[0] * x[1]).sin() + x[0] * x[0];
        let a = nelder_mead_minimize(f, &[1.0, 1.0], NmOptions::default());
        let b = nelder_mead_minimize(f, &[1.0, 1.0], NmOptions::default());
        assert_eq!(a.best, b.best);
        assert_eq!(a.evals, b.evals);
    }
}
