//! Coupled message passing on a graph and its directed line graph.
//!
//! Per layer, with feature matrices `h` (nodes) and `g` (directed edges):
//!
//! ```text
//! ȳ = h θ^0 + D h θ^1 + Σ_{j=1..J} A_j h θ^j + S g θ^{J+1} + U g θ^{J+2}
//! z̄ = g φ^0 + D_L g φ^1 + Σ_{j=1..J} B_j g φ^j + S^T h φ^{J+1} + U^T h φ^{J+2}
//! h ← [relu(ȳ), ȳ],  g ← [relu(z̄), z̄]
//! ```
//!
//! The index-1 matrix is shared between the degree term and the first power
//! term, matching the printed update (the parameter set per stream is
//! exactly θ^0..θ^{J+2}). The reverse incidence pullbacks use `S^T`/`U^T`,
//! which is what the shapes require.

use super::{GnnError, GnnInputs, GnnModel};
use crate::grad::Tensor;

pub(crate) fn forward(model: &GnnModel, inputs: &GnnInputs) -> Result<Tensor, GnnError> {
    forward_features(model, inputs)
}

/// Run the coupled layers and return the final n×d node features.
pub fn forward_features(model: &GnnModel, inputs: &GnnInputs) -> Result<Tensor, GnnError> {
    let ops = inputs.lgnn.as_ref().expect("LGNN forward needs LGNN operators");
    let hops = model.config().hops;
    let mut h = inputs.h0.clone();
    let mut g = ops.g0.clone();
    for layer in 0..model.config().layers {
        let params = model.layer_params(layer);
        let (theta, phi) = params.split_at(hops + 3);
        let ybar = stream_update(&h, &g, &ops.deg, &ops.a_pows, &ops.s, &ops.u, theta)?;
        let zbar = stream_update(&g, &h, &ops.line_deg, &ops.b_pows, &ops.s_t, &ops.u_t, phi)?;
        h = ybar.relu().concat_cols(&ybar)?;
        g = zbar.relu().concat_cols(&zbar)?;
    }
    Ok(h)
}

fn stream_update(
    own: &Tensor,
    other: &Tensor,
    deg: &Tensor,
    pows: &[Tensor],
    incidence_s: &Tensor,
    incidence_u: &Tensor,
    w: &[Tensor],
) -> Result<Tensor, GnnError> {
    let hops = pows.len();
    let mut acc = own.matmul(&w[0])?;
    // degree and first power share w[1]
    let mixed = deg.matmul(own)?.add(&pows[0].matmul(own)?)?;
    acc = acc.add(&mixed.matmul(&w[1])?)?;
    for j in 2..=hops {
        acc = acc.add(&pows[j - 1].matmul(own)?.matmul(&w[j])?)?;
    }
    acc = acc.add(&incidence_s.matmul(other)?.matmul(&w[hops + 1])?)?;
    acc = acc.add(&incidence_u.matmul(other)?.matmul(&w[hops + 2])?)?;
    Ok(acc)
}
