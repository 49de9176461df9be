//! First-order descent rules over flat parameter vectors.

/// Which first-order rule a caller wants; used by hand-off code that takes
/// the rule as data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentRule {
    Sgd,
    Adam,
    RmsProp,
}

pub fn sgd_step(params: &mut [f64], grad: &[f64], lr: f64) {
    for (p, g) in params.iter_mut().zip(grad) {
        *p -= lr * g;
    }
}

/// Adam with bias correction; `t` must count from 1 on the first call.
pub fn adam_step(params: &mut [f64], grad: &[f64], lr: f64, m: &mut [f64], v: &mut [f64], t: u64) {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let bc1 = 1.0 - B1.powi(t as i32);
    let bc2 = 1.0 - B2.powi(t as i32);
    for k in 0..params.len() {
        m[k] = B1 * m[k] + (1.0 - B1) * grad[k];
        v[k] = B2 * v[k] + (1.0 - B2) * grad[k] * grad[k];
        let mhat = m[k] / bc1;
        let vhat = v[k] / bc2;
        params[k] -= lr * mhat / (vhat.sqrt() + EPS);
    }
}

pub fn rmsprop_step(params: &mut [f64], grad: &[f64], lr: f64, v: &mut [f64]) {
    const DECAY: f64 = 0.9;
    const EPS: f64 = 1e-8;
    for k in 0..params.len() {
        v[k] = DECAY * v[k] + (1.0 - DECAY) * grad[k] * grad[k];
        params[k] -= lr * grad[k] / (v[k].sqrt() + EPS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut p = vec![0.3, -0.7];
        let before = p.clone();
        sgd_step(&mut p, &[0.0, 0.0], 0.1);
        assert_eq!(p, before);
        let (mut m, mut v) = (vec![0.0; 2], vec![0.0; 2]);
        adam_step(&mut p, &[0.0, 0.0], 0.1, &mut m, &mut v, 1);
        assert_eq!(p, before);
    }

    #[test]
    fn adam_first_step_is_lr_times_sign() {
        // bias correction makes the very first update lr * g/|g| (up to eps)
        let mut p = vec![0.0, 0.0];
        let (mut m, mut v) = (vec![0.0; 2], vec![0.0; 2]);
        adam_step(&mut p, &[3.0, -0.004], 0.1, &mut m, &mut v, 1);
        assert!((p[0] + 0.1).abs() < 1e-5);
        assert!((p[1] - 0.1).abs() < 1e-3);
    }

    #[test]
    fn rmsprop_normalises_scale() {
        let mut a = vec![0.0];
        let mut b = vec![0.0];
        let mut va = vec![0.0];
        let mut vb = vec![0.0];
        rmsprop_step(&mut a, &[100.0], 0.01, &mut va);
        rmsprop_step(&mut b, &[0.01], 0.01, &mut vb);
        // steps have the same magnitude regardless of gradient scale
        assert!((a[0].abs() - b[0].abs()).abs() < 1e-4);
    }
}
