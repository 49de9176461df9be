//! Graph convolutional network: neighbour-mean plus self-term updates,
//! `h_{t+1} = relu(N h_t θ^0 + h_t θ^1)` with `N = D^{-1} A` (rows of
//! isolated nodes are zero, so their neighbour term vanishes).

use super::{GnnError, GnnInputs, GnnModel};
use crate::grad::Tensor;

pub(crate) fn forward(model: &GnnModel, inputs: &GnnInputs) -> Result<Tensor, GnnError> {
    forward_features(model, inputs)
}

/// Run the convolution layers and return the final n×d node features.
pub fn forward_features(model: &GnnModel, inputs: &GnnInputs) -> Result<Tensor, GnnError> {
    let nm = inputs.nbr_mean.as_ref().expect("GCN forward needs the neighbour-mean operator");
    let mut h = inputs.h0.clone();
    for layer in 0..model.config().layers {
        let params = model.layer_params(layer);
        let agg = nm.matmul(&h)?.matmul(&params[0])?;
        let own = h.matmul(&params[1])?;
        h = agg.add(&own)?.relu();
    }
    Ok(h)
}
