//! Small fully connected networks over autodiff tensors.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::grad::{GradError, Tensor};

/// A plain MLP: linear layers with tanh on every hidden layer, linear output.
pub struct Mlp {
    layers: Vec<(Tensor, Tensor)>,
}

impl Mlp {
    /// Xavier-uniform initialisation over the given layer widths.
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "an MLP needs at least input and output widths");
        let layers = dims
            .windows(2)
            .map(|w| {
                let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let weight = Array2::from_shape_fn((w[0], w[1]), |_| rng.gen_range(-bound..bound));
                (Tensor::parameter(weight), Tensor::parameter(Array2::zeros((1, w[1]))))
            })
            .collect();
        Self { layers }
    }

    /// All-zero network: outputs zero for any input.
    pub fn zeroed(dims: &[usize]) -> Self {
        let layers = dims
            .windows(2)
            .map(|w| {
                (
                    Tensor::parameter(Array2::zeros((w[0], w[1]))),
                    Tensor::parameter(Array2::zeros((1, w[1]))),
                )
            })
            .collect();
        Self { layers }
    }

    /// Batch forward: rows are samples.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor, GradError> {
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (k, (w, b)) in self.layers.iter().enumerate() {
            h = h.matmul(w)?.add_bias(b)?;
            if k < last {
                h = h.tanh();
            }
        }
        Ok(h)
    }

    pub fn parameters(&self) -> Vec<Tensor> {
        self.layers.iter().flat_map(|(w, b)| [w.clone(), b.clone()]).collect()
    }
}
