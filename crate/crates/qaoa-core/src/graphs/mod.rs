//! Undirected weighted graphs with the derived operators the rest of the
//! pipeline needs: adjacency / degree / Laplacian views, random regular
//! generation, line-graph operators and a brute-force Max-Cut oracle.
//!
//! Conventions: the canonical cut value is `cut(z) = 1/2 Σ_{(i,j)} w_ij (1 -
//! z_i z_j)` for spins `z_i ∈ {+1, -1}`, so approximation ratios land in
//! `[0, 1]`. The identity `z^T L z = 4 cut(z)` ties it to the Laplacian QUBO.

mod generate;
mod line_graph;
mod oracle;

pub use generate::random_regular;
pub use line_graph::{binary_powers, line_graph_view, power_adjacency, LineGraphView};
pub use oracle::{max_cut_oracle, ORACLE_MAX_NODES};

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("n*k must be even for a k-regular graph, got n={n}, k={k}")]
    OddDegreeSum { n: usize, k: usize },
    #[error("degree k={k} must be smaller than node count n={n}")]
    DegreeTooLarge { n: usize, k: usize },
    #[error("configuration model gave up after {retries} retries (n={n}, k={k})")]
    GenerationFailed { n: usize, k: usize, retries: usize },
    #[error("oracle enumerates at most {cap} nodes, graph has {n}")]
    OracleCapExceeded { n: usize, cap: usize },
    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: usize, j: usize, reason: String },
    #[error("edge list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line graph requires at least one edge")]
    EmptyEdgeSet,
}

/// Undirected weighted graph, immutable once built.
///
/// Edges are stored sorted with `i < j`; self-loops and duplicates are
/// rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Build from an edge list. Endpoints are normalised to `i < j` and
    /// sorted; duplicate or degenerate edges are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, GraphError> {
        let mut es: Vec<(usize, usize, f64)> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(GraphError::InvalidEdge { i: a, j: b, reason: "self-loop".into() });
            }
            if a >= n || b >= n {
                return Err(GraphError::InvalidEdge { i: a, j: b, reason: format!("node index out of range (n={n})") });
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            es.push((i, j, w));
        }
        es.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        if es.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            let w = es.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)).unwrap();
            return Err(GraphError::InvalidEdge { i: w[0].0, j: w[0].1, reason: "duplicate edge".into() });
        }
        Ok(Self { n, edges: es })
    }

    /// Unweighted convenience constructor (all weights 1).
    pub fn unweighted(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        Self::new(n, edges.into_iter().map(|(i, j)| (i, j, 1.0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j, w)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weighted node degrees `deg(i) = Σ_j w_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    /// Symmetric adjacency matrix `A`.
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(i, j, w) in &self.edges {
            a[[i, j]] = w;
            a[[j, i]] = w;
        }
        a
    }

    /// Diagonal degree matrix `D`.
    pub fn degree_matrix(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n, self.n));
        for (i, deg) in self.degrees().into_iter().enumerate() {
            d[[i, i]] = deg;
        }
        d
    }

    /// Graph Laplacian `L = D - A`.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = self.degree_matrix();
        for &(i, j, w) in &self.edges {
            l[[i, j]] -= w;
            l[[j, i]] -= w;
        }
        l
    }

    /// Relabel nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        Self::new(self.n, self.edges.iter().map(|&(i, j, w)| (perm[i], perm[j], w)))
    }

    /// Serialise as edge-list text: first line `n m`, then one `i j [w]` line
    /// per edge in sorted order (weight omitted when 1). Deterministic, so
    /// files are diffable.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(i, j, w) in &self.edges {
            if w == 1.0 {
                out.push_str(&format!("{i} {j}\n"));
            } else {
                out.push_str(&format!("{i} {j} {w:e}\n"));
            }
        }
        out
    }

    /// Parse the edge-list text format produced by [`Graph::to_edge_list`].
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty file".into() })?;
        let mut it = header.split_whitespace();
        let parse_usize = |tok: Option<&str>, line: usize| -> Result<usize, GraphError> {
            tok.ok_or(GraphError::Parse { line, msg: "missing field".into() })?
                .parse()
                .map_err(|e| GraphError::Parse { line, msg: format!("{e}") })
        };
        let n = parse_usize(it.next(), line_no)?;
        let m = parse_usize(it.next(), line_no)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let i = parse_usize(it.next(), line)?;
            let j = parse_usize(it.next(), line)?;
            let w = match it.next() {
                Some(tok) => tok.parse::<f64>().map_err(|e| GraphError::Parse { line, msg: format!("{e}") })?,
                None => 1.0,
            };
            edges.push((i, j, w));
        }
        if edges.len() != m {
            return Err(GraphError::Parse { line: 1, msg: format!("header promises {m} edges, found {}", edges.len()) });
        }
        Self::new(n, edges)
    }
}

/// Cut value `1/2 Σ_{(i,j)∈E} w_ij (1 - z_i z_j)` for spins `z ∈ {+1,-1}^n`.
pub fn cut_value(g: &Graph, z: &[i8]) -> f64 {
    debug_assert_eq!(z.len(), g.n);
    let mut cut = 0.0;
    for &(i, j, w) in &g.edges {
        if z[i] != z[j] {
            cut += w;
        }
    }
    cut
}

/// Soft cut of a fractional assignment: the Laplacian quadratic form
/// `1/4 (2x-1)^T L (2x-1)`, evaluated edge-wise as `Σ w_ij (x_i - x_j)^2`.
/// Agrees with [`cut_value`] on hard 0/1 vectors.
pub fn soft_cut_value(g: &Graph, x: &[f64]) -> f64 {
    let mut cut = 0.0;
    for &(i, j, w) in &g.edges {
        let d = x[i] - x[j];
        cut += w * d * d;
    }
    cut
}

/// A spin assignment together with its cut value.
#[derive(Debug, Clone, PartialEq)]
pub struct CutAssignment {
    pub z: Vec<i8>,
    pub cut_value: f64,
}

impl CutAssignment {
    pub fn from_spins(g: &Graph, z: Vec<i8>) -> Self {
        let cut_value = cut_value(g, &z);
        Self { z, cut_value }
    }

    /// Bits `x ∈ {0,1}` with `z_i = 2 x_i - 1`.
    pub fn bits(&self) -> Vec<u8> {
        self.z.iter().map(|&s| if s > 0 { 1 } else { 0 }).collect()
    }
}
