//! Graph neural networks for Max-Cut: a line graph neural network (LGNN)
//! with coupled message passing on the graph and its directed line graph,
//! and a simpler graph convolutional network (GCN).
//!
//! Both map per-node degree features through `T` parameterised layers to a
//! two-output head; a row softmax turns the head outputs into per-node
//! probabilities of sitting on one side of the cut. Training is
//! unsupervised: the loss is the negated soft cut `-(1/4)(2p-1)^T L (2p-1)`,
//! averaged over a training ensemble, so no labelled optima are needed.
//! The soft probabilities double as warm-start values `x*` for QAOA.

mod gcn;
mod lgnn;
mod train;

pub use train::{train, TrainReport};

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use thiserror::Error;

use crate::grad::{checkpoint, GradError, Tensor};
use crate::graphs::{cut_value, line_graph_view, Graph, GraphError, LineGraphView};
use crate::init::{InitError, WarmStart, WarmStartSource};

#[derive(Debug, Error)]
pub enum GnnError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Checkpoint(#[from] checkpoint::CheckpointError),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("loss diverged to NaN at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("feature width must be even for the LGNN concatenation, got {0}")]
    OddWidth(usize),
    #[error("hop count must be at least 1")]
    ZeroHops,
    #[error("bad checkpoint header: {0}")]
    BadHeader(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Lgnn,
    Gcn,
}

impl Arch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arch::Lgnn => "lgnn",
            Arch::Gcn => "gcn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lgnn" => Some(Arch::Lgnn),
            "gcn" => Some(Arch::Gcn),
            _ => None,
        }
    }
}

/// Architecture hyperparameters.
///
/// `width` is the feature dimension d (halved per trainable map so the
/// `[y, ȳ]` concatenation restores d), `hops` is the power-adjacency count J
/// and `layers` the message-passing depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GnnConfig {
    pub arch: Arch,
    pub width: usize,
    pub hops: usize,
    pub layers: usize,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self { arch: Arch::Lgnn, width: 16, hops: 3, layers: 8 }
    }
}

impl GnnConfig {
    pub fn gcn() -> Self {
        Self { arch: Arch::Gcn, ..Self::default() }
    }
}

/// Per-node degree features for the graph and its directed line graph.
///
/// Every feature starts as the degree of its node; line-graph degrees are
/// out-degrees under the non-backtracking operator.
pub fn init_features(g: &Graph) -> Result<(Array2<f64>, Array2<f64>), GraphError> {
    let view = line_graph_view(g)?;
    Ok((node_features(g), line_features(&view)))
}

fn node_features(g: &Graph) -> Array2<f64> {
    let deg = g.degrees();
    Array2::from_shape_fn((g.n(), 1), |(i, _)| deg[i])
}

fn line_features(view: &LineGraphView) -> Array2<f64> {
    let deg = view.degrees();
    Array2::from_shape_fn((view.node_count(), 1), |(i, _)| deg[i])
}

/// Constant graph operators, prebuilt once per graph and shared across
/// forward passes.
pub struct GnnInputs {
    laplacian: Array2<f64>,
    h0: Tensor,
    /// LGNN stream: (g0, D, A_j.., D_L, B_j.., S, U, S^T, U^T)
    lgnn: Option<LgnnOperators>,
    /// GCN stream: neighbour-mean matrix D^{-1} A with zero rows for
    /// isolated nodes.
    nbr_mean: Option<Tensor>,
}

struct LgnnOperators {
    g0: Tensor,
    deg: Tensor,
    a_pows: Vec<Tensor>,
    line_deg: Tensor,
    b_pows: Vec<Tensor>,
    s: Tensor,
    u: Tensor,
    s_t: Tensor,
    u_t: Tensor,
}

impl GnnInputs {
    pub fn new(g: &Graph, config: &GnnConfig) -> Result<Self, GnnError> {
        let laplacian = g.laplacian();
        let h0 = Tensor::constant(node_features(g));
        let (lgnn, nbr_mean) = match config.arch {
            Arch::Lgnn => {
                let view = line_graph_view(g)?;
                let g0 = Tensor::constant(line_features(&view));
                let deg = Tensor::constant(g.degree_matrix());
                let a_pows = crate::graphs::power_adjacency(g, config.hops)
                    .into_iter()
                    .map(Tensor::constant)
                    .collect();
                let line_deg = {
                    let d = view.degrees();
                    let mut m = Array2::zeros((d.len(), d.len()));
                    for (i, &v) in d.iter().enumerate() {
                        m[[i, i]] = v;
                    }
                    Tensor::constant(m)
                };
                let b_pows = view
                    .b_powers(config.hops)
                    .into_iter()
                    .map(Tensor::constant)
                    .collect();
                let s = view.signed_incidence().clone();
                let u = view.unsigned_incidence().clone();
                let ops = LgnnOperators {
                    g0,
                    deg,
                    a_pows,
                    line_deg,
                    b_pows,
                    s_t: Tensor::constant(s.t().to_owned()),
                    u_t: Tensor::constant(u.t().to_owned()),
                    s: Tensor::constant(s),
                    u: Tensor::constant(u),
                };
                (Some(ops), None)
            }
            Arch::Gcn => {
                let deg = g.degrees();
                let adj = g.adjacency();
                let mut nm = Array2::zeros((g.n(), g.n()));
                for i in 0..g.n() {
                    if deg[i] > 0.0 {
                        for j in 0..g.n() {
                            nm[[i, j]] = adj[[i, j]] / deg[i];
                        }
                    }
                }
                (None, Some(Tensor::constant(nm)))
            }
        };
        Ok(Self { laplacian, h0, lgnn, nbr_mean })
    }

    pub fn laplacian(&self) -> &Array2<f64> {
        &self.laplacian
    }
}

/// A trained (or trainable) GNN: layer parameters plus the two-output head.
pub struct GnnModel {
    config: GnnConfig,
    layers: Vec<Vec<Tensor>>,
    head_w: Tensor,
    head_b: Tensor,
}

impl GnnModel {
    /// Xavier-uniform seeded initialisation.
    pub fn new(config: GnnConfig, seed: u64) -> Result<Self, GnnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(config, |rows, cols, rng_used: &mut ChaCha8Rng| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng_used.gen_range(-bound..bound))
        }, &mut rng)
    }

    /// All-zero weights; the head then outputs equal logits, so every node
    /// probability is exactly 0.5.
    pub fn zeroed(config: GnnConfig) -> Result<Self, GnnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Self::build(config, |rows, cols, _| Array2::zeros((rows, cols)), &mut rng)
    }

    fn build(
        config: GnnConfig,
        mut make: impl FnMut(usize, usize, &mut ChaCha8Rng) -> Array2<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, GnnError> {
        if config.arch == Arch::Lgnn && config.width % 2 != 0 {
            return Err(GnnError::OddWidth(config.width));
        }
        if config.hops == 0 {
            return Err(GnnError::ZeroHops);
        }
        let d = config.width;
        let half = d / 2;
        let mut layers = Vec::with_capacity(config.layers);
        for layer in 0..config.layers {
            let in_w = if layer == 0 { 1 } else { d };
            let params = match config.arch {
                Arch::Lgnn => {
                    // θ^0..θ^J own-stream maps, θ^{J+1}, θ^{J+2} cross-stream,
                    // then the φ block in the same order
                    let mut p = Vec::with_capacity(2 * (config.hops + 3));
                    for block in 0..2 {
                        let _ = block;
                        for k in 0..=config.hops {
                            let _ = k;
                            p.push(Tensor::parameter(make(in_w, half, rng)));
                        }
                        for _ in 0..2 {
                            p.push(Tensor::parameter(make(in_w, half, rng)));
                        }
                    }
                    p
                }
                Arch::Gcn => {
                    let out_w = d;
                    vec![
                        Tensor::parameter(make(in_w, out_w, rng)),
                        Tensor::parameter(make(in_w, out_w, rng)),
                    ]
                }
            };
            layers.push(params);
        }
        let head_w = Tensor::parameter(make(d, 2, rng));
        let head_b = Tensor::parameter(make(1, 2, rng));
        Ok(Self { config, layers, head_w, head_b })
    }

    pub fn config(&self) -> &GnnConfig {
        &self.config
    }

    pub fn parameters(&self) -> Vec<Tensor> {
        let mut out: Vec<Tensor> = self.layers.iter().flatten().cloned().collect();
        out.push(self.head_w.clone());
        out.push(self.head_b.clone());
        out
    }

    /// Forward pass producing the n×1 probability tensor (graph attached,
    /// so a loss built on it can be backpropagated).
    pub fn forward(&self, inputs: &GnnInputs) -> Result<Tensor, GnnError> {
        let features = match self.config.arch {
            Arch::Lgnn => lgnn::forward(self, inputs)?,
            Arch::Gcn => gcn::forward(self, inputs)?,
        };
        self.head_probabilities(&features)
    }

    /// Two-output linear head plus row softmax; component 0 is the cut-side
    /// probability.
    pub fn head_probabilities(&self, features: &Tensor) -> Result<Tensor, GnnError> {
        let logits = features.matmul(&self.head_w)?.add_bias(&self.head_b)?;
        Ok(logits.softmax_rows().col(0))
    }

    /// Detached per-node probabilities.
    pub fn probabilities(&self, g: &Graph) -> Result<Vec<f64>, GnnError> {
        let inputs = GnnInputs::new(g, &self.config)?;
        let p = self.forward(&inputs)?;
        let v = p.value();
        Ok(v.column(0).to_vec())
    }

    pub(crate) fn layer_params(&self, layer: usize) -> &[Tensor] {
        &self.layers[layer]
    }

    /// Write a versioned checkpoint: an architecture header line followed by
    /// the tensor dump.
    pub fn save<W: Write>(&self, w: &mut W) -> Result<(), GnnError> {
        writeln!(
            w,
            "# gnn v1 arch={} width={} hops={} layers={}",
            self.config.arch.as_str(),
            self.config.width,
            self.config.hops,
            self.config.layers
        )
        .map_err(checkpoint::CheckpointError::Io)?;
        let named: Vec<(String, Array2<f64>)> = self
            .named_parameters()
            .into_iter()
            .map(|(name, t)| (name, t.value().clone()))
            .collect();
        checkpoint::write_tensors(w, &named).map_err(checkpoint::CheckpointError::Io)?;
        Ok(())
    }

    pub fn load<R: BufRead>(r: &mut R) -> Result<Self, GnnError> {
        let mut header = String::new();
        r.read_line(&mut header).map_err(checkpoint::CheckpointError::Io)?;
        let mut arch = None;
        let mut width = None;
        let mut hops = None;
        let mut layers = None;
        if !header.starts_with("# gnn v1") {
            return Err(GnnError::BadHeader(header.trim().to_string()));
        }
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("arch=") {
                arch = Arch::parse(v);
            } else if let Some(v) = tok.strip_prefix("width=") {
                width = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("hops=") {
                hops = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("layers=") {
                layers = v.parse().ok();
            }
        }
        let config = GnnConfig {
            arch: arch.ok_or_else(|| GnnError::BadHeader("missing arch".into()))?,
            width: width.ok_or_else(|| GnnError::BadHeader("missing width".into()))?,
            hops: hops.ok_or_else(|| GnnError::BadHeader("missing hops".into()))?,
            layers: layers.ok_or_else(|| GnnError::BadHeader("missing layers".into()))?,
        };
        let model = Self::zeroed(config)?;
        let tensors = checkpoint::read_tensors(r)?;
        let named = model.named_parameters();
        if tensors.len() != named.len() {
            return Err(GnnError::BadHeader(format!(
                "checkpoint has {} tensors, architecture needs {}",
                tensors.len(),
                named.len()
            )));
        }
        for ((name, data), (expect, slot)) in tensors.into_iter().zip(named) {
            if name != expect {
                return Err(GnnError::BadHeader(format!("tensor {name} where {expect} expected")));
            }
            if (data.nrows(), data.ncols()) != slot.shape() {
                return Err(GnnError::BadHeader(format!("tensor {name} has the wrong shape")));
            }
            slot.set_value(data);
        }
        Ok(model)
    }

    fn named_parameters(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for (k, t) in layer.iter().enumerate() {
                out.push((format!("layer{i}_w{k}"), t.clone()));
            }
        }
        out.push(("head_w".into(), self.head_w.clone()));
        out.push(("head_b".into(), self.head_b.clone()));
        out
    }
}

/// Unsupervised loss for one graph: the negated soft cut
/// `-(1/4)(2p-1)^T L (2p-1)`, to be minimised.
pub fn gnn_loss(p: &Tensor, inputs: &GnnInputs) -> Result<Tensor, GnnError> {
    let q = p.affine(2.0, -1.0);
    Ok(q.quad_form(inputs.laplacian())?.scale(-0.25))
}

/// Threshold probabilities at 1/2 (ties round up) and report the cut.
pub fn round_probabilities(g: &Graph, p: &[f64]) -> (Vec<f64>, f64) {
    let bits: Vec<f64> = p.iter().map(|&v| if v >= 0.5 { 1.0 } else { 0.0 }).collect();
    let z: Vec<i8> = bits.iter().map(|&b| if b >= 0.5 { 1 } else { -1 }).collect();
    let cut = cut_value(g, &z);
    (bits, cut)
}

/// Soft GNN probabilities as warm-start values, ε-clamped.
///
/// Uses the probabilities directly rather than rounded bits: rounding first
/// would collapse every qubit onto the ε-corners and discard the confidence
/// information the GNN produces.
pub fn warmstart_from_gnn(model: &GnnModel, g: &Graph, epsilon: f64) -> Result<WarmStart, GnnError> {
    let p = model.probabilities(g)?;
    WarmStart::with_source(p, epsilon, WarmStartSource::Gnn).map_err(|e| match e {
        InitError::EpsilonOutOfRange(v) => GnnError::BadHeader(format!("epsilon {v} out of range")),
        other => GnnError::BadHeader(format!("{other}")),
    })
}

/// Soft cut ratio achieved by rounding the model output, against a known
/// optimum.
pub fn rounded_ratio(model: &GnnModel, g: &Graph, optimum: f64) -> Result<f64, GnnError> {
    let p = model.probabilities(g)?;
    let (_, cut) = round_probabilities(g, &p);
    Ok(cut / optimum)
}

pub use gcn::forward_features as gcn_features;
pub use lgnn::forward_features as lgnn_features;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{max_cut_oracle, random_regular, soft_cut_value};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn single_edge() -> Graph {
        Graph::unweighted(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn degree_features_match_examples() {
        let g = random_regular(8, 3, 0).unwrap();
        let (h, _) = init_features(&g).unwrap();
        assert!(h.iter().all(|&v| v == 3.0));

        let (h, gl) = init_features(&single_edge()).unwrap();
        assert!(h.iter().all(|&v| v == 1.0));
        assert!(gl.iter().all(|&v| v == 0.0));

        let path = Graph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let (h, _) = init_features(&path).unwrap();
        assert_eq!(h.column(0).to_vec(), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn zero_model_outputs_half_everywhere() {
        for config in [GnnConfig::default(), GnnConfig::gcn()] {
            let g = random_regular(6, 3, 1).unwrap();
            let model = GnnModel::zeroed(config).unwrap();
            let p = model.probabilities(&g).unwrap();
            assert!(p.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        }
    }

    #[test]
    fn loss_examples() {
        let g = single_edge();
        let inputs = GnnInputs::new(&g, &GnnConfig::default()).unwrap();
        // p ≡ 0.5 → loss 0
        let p = Tensor::constant(ndarray::array![[0.5], [0.5]]);
        assert_eq!(gnn_loss(&p, &inputs).unwrap().item(), 0.0);
        // p = (1, 0) → loss -1
        let p = Tensor::constant(ndarray::array![[1.0], [0.0]]);
        assert_eq!(gnn_loss(&p, &inputs).unwrap().item(), -1.0);
    }

    #[test]
    fn hard_probabilities_negate_the_cut_exactly() {
        let mut rng = StdRng::seed_from_u64(4);
        for seed in 0..10 {
            let g = random_regular(10, 3, seed).unwrap();
            let inputs = GnnInputs::new(&g, &GnnConfig::default()).unwrap();
            for _ in 0..10 {
                let bits: Vec<f64> = (0..10).map(|_| if rng.gen::<bool>() { 1.0 } else { 0.0 }).collect();
                let z: Vec<i8> = bits.iter().map(|&b| if b >= 0.5 { 1 } else { -1 }).collect();
                let p = Tensor::constant(Array2::from_shape_fn((10, 1), |(i, _)| bits[i]));
                let loss = gnn_loss(&p, &inputs).unwrap().item();
                assert!((-loss - cut_value(&g, &z)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        // through the full LGNN on a 6-node graph
        let g = random_regular(6, 3, 3).unwrap();
        let config = GnnConfig { arch: Arch::Lgnn, width: 4, hops: 2, layers: 2 };
        let model = GnnModel::new(config, 7).unwrap();
        let inputs = GnnInputs::new(&g, &config).unwrap();

        let loss = gnn_loss(&model.forward(&inputs).unwrap(), &inputs).unwrap();
        crate::grad::backward(&loss).unwrap();

        let h = 1e-5;
        for t in model.parameters() {
            let Some(grad) = t.grad() else { continue };
            let base = t.value().clone();
            for i in 0..base.nrows() {
                for j in 0..base.ncols() {
                    let mut d = base.clone();
                    d[[i, j] ] += h;
                    t.set_value(d);
                    let fp = gnn_loss(&model.forward(&inputs).unwrap(), &inputs).unwrap().item();
                    let mut d = base.clone();
                    d[[i, j]] -= h;
                    t.set_value(d);
                    let fm = gnn_loss(&model.forward(&inputs).unwrap(), &inputs).unwrap().item();
                    t.set_value(base.clone());
                    let fd = (fp - fm) / (2.0 * h);
                    let denom = fd.abs().max(grad[[i, j]].abs()).max(1e-4);
                    assert!(
                        ((fd - grad[[i, j]]) / denom).abs() < 1e-5,
                        "fd {fd} vs analytic {}",
                        grad[[i, j]]
                    );
                }
            }
            t.zero_grad();
        }
    }

    #[test]
    fn forward_is_permutation_equivariant() {
        let mut rng = StdRng::seed_from_u64(11);
        for config in [
            GnnConfig { arch: Arch::Lgnn, width: 8, hops: 2, layers: 3 },
            GnnConfig { arch: Arch::Gcn, width: 8, hops: 2, layers: 3 },
        ] {
            let g = random_regular(8, 3, 5).unwrap();
            let model = GnnModel::new(config, 13).unwrap();
            let p = model.probabilities(&g).unwrap();

            let mut perm: Vec<usize> = (0..8).collect();
            for i in (1..8).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            let gp = g.permuted(&perm).unwrap();
            let pp = model.probabilities(&gp).unwrap();
            for (i, &pi) in p.iter().enumerate() {
                assert!(
                    (pi - pp[perm[i]]).abs() < 1e-9,
                    "node {i}: {pi} vs {}",
                    pp[perm[i]]
                );
            }
        }
    }

    #[test]
    fn forward_is_reproducible() {
        let g = Graph::unweighted(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let a = GnnModel::new(GnnConfig::default(), 3).unwrap().probabilities(&g).unwrap();
        let b = GnnModel::new(GnnConfig::default(), 3).unwrap().probabilities(&g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shared_head_agrees_across_architectures() {
        // identical final features through either model's head give identical
        // probabilities once the head weights match
        let lgnn = GnnModel::new(GnnConfig::default(), 1).unwrap();
        let gcn = GnnModel::new(GnnConfig::gcn(), 2).unwrap();
        gcn.head_w.set_value(lgnn.head_w.value().clone());
        gcn.head_b.set_value(lgnn.head_b.value().clone());
        let feats = Tensor::constant(Array2::from_shape_fn((5, 16), |(i, j)| (i * j) as f64 * 0.1));
        let a = lgnn.head_probabilities(&feats).unwrap();
        let b = gcn.head_probabilities(&feats).unwrap();
        assert_eq!(*a.value(), *b.value());
    }

    #[test]
    fn gcn_handles_isolated_nodes() {
        let g = Graph::unweighted(4, [(0, 1)]).unwrap(); // nodes 2, 3 isolated
        let model = GnnModel::new(GnnConfig::gcn(), 5).unwrap();
        let p = model.probabilities(&g).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn size_generalisation_needs_no_retraining() {
        // weights are shape-independent: a model built once runs on any size
        let model = GnnModel::new(GnnConfig::default(), 9).unwrap();
        for (n, seed) in [(6usize, 0u64), (10, 1), (14, 2)] {
            let g = random_regular(n, 3, seed).unwrap();
            let p = model.probabilities(&g).unwrap();
            assert_eq!(p.len(), n);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn rounding_and_bounds() {
        let g = single_edge();
        let (bits, cut) = round_probabilities(&g, &[0.9, 0.1]);
        assert_eq!(bits, vec![1.0, 0.0]);
        assert_eq!(cut, 1.0);
        // ties round to 1, giving the all-ones assignment and cut 0
        let (bits, cut) = round_probabilities(&g, &[0.5, 0.5]);
        assert_eq!(bits, vec![1.0, 1.0]);
        assert_eq!(cut, 0.0);

        for seed in 0..5 {
            let g = random_regular(12, 3, seed).unwrap();
            let opt = max_cut_oracle(&g).unwrap().cut_value;
            let model = GnnModel::new(GnnConfig::default(), seed).unwrap();
            let p = model.probabilities(&g).unwrap();
            let (_, cut) = round_probabilities(&g, &p);
            assert!(cut <= opt);
        }
    }

    #[test]
    fn zero_model_warmstart_recovers_the_cold_start() {
        let g = random_regular(6, 3, 2).unwrap();
        let model = GnnModel::zeroed(GnnConfig::default()).unwrap();
        let ws = warmstart_from_gnn(&model, &g, 0.25).unwrap();
        assert!(ws.x_tilde().iter().all(|&x| (x - 0.5).abs() < 1e-12));
        let (state, _) = crate::qsim::prepare_warmstart_state(&ws).unwrap();
        let plus = crate::qsim::prepare_plus_state(6).unwrap();
        assert!((state.overlap_sqr(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warmstart_respects_epsilon_clamp() {
        let g = random_regular(8, 3, 6).unwrap();
        let model = GnnModel::new(GnnConfig::default(), 21).unwrap();
        let ws = warmstart_from_gnn(&model, &g, 0.2).unwrap();
        assert!(ws.x_tilde().iter().all(|&x| (0.2..=0.8).contains(&x)));
        assert_eq!(ws.source(), WarmStartSource::Gnn);
    }

    #[test]
    fn checkpoint_round_trip_preserves_outputs() {
        let g = random_regular(8, 3, 4).unwrap();
        let model = GnnModel::new(GnnConfig { arch: Arch::Lgnn, width: 8, hops: 2, layers: 3 }, 17).unwrap();
        let before = model.probabilities(&g).unwrap();
        let mut buf = Vec::new();
        model.save(&mut buf).unwrap();
        let loaded = GnnModel::load(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.config(), model.config());
        let after = loaded.probabilities(&g).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn soft_cut_is_what_the_loss_measures() {
        let g = random_regular(8, 3, 8).unwrap();
        let inputs = GnnInputs::new(&g, &GnnConfig::default()).unwrap();
        let p: Vec<f64> = (0..8).map(|i| 0.1 + 0.08 * i as f64).collect();
        let pt = Tensor::constant(Array2::from_shape_fn((8, 1), |(i, _)| p[i]));
        let loss = gnn_loss(&pt, &inputs).unwrap().item();
        assert!((-loss - soft_cut_value(&g, &p)).abs() < 1e-12);
    }
}
