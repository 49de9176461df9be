//! Directed line-graph operators: non-backtracking matrix, incidence
//! matrices and binarised power adjacencies.

use ndarray::Array2;

use super::{Graph, GraphError};

/// The directed line graph L(G) of a base graph.
///
/// Every undirected edge {i, j} contributes the two directed nodes i->j and
/// j->i, so L(G) has 2|E| nodes. Edge e = (i, j) of the base graph (with
/// i < j) occupies slots 2e (i->j) and 2e+1 (j->i).
#[derive(Debug, Clone)]
pub struct LineGraphView {
    directed: Vec<(usize, usize)>,
    b: Array2<f64>,
    s: Array2<f64>,
    u: Array2<f64>,
}

impl LineGraphView {
    /// Directed edges (tail, head) in slot order.
    pub fn directed_nodes(&self) -> &[(usize, usize)] {
        &self.directed
    }

    pub fn node_count(&self) -> usize {
        self.directed.len()
    }

    /// Non-backtracking operator: `B[(i->j), (k->l)] = 1` iff `j = k` and
    /// `i != l`.
    pub fn non_backtracking(&self) -> &Array2<f64> {
        &self.b
    }

    /// Signed incidence matrix, n x 2|E|: +1 at the tail, -1 at the head.
    pub fn signed_incidence(&self) -> &Array2<f64> {
        &self.s
    }

    /// Unsigned incidence matrix, n x 2|E|: 1 at the tail.
    pub fn unsigned_incidence(&self) -> &Array2<f64> {
        &self.u
    }

    /// Out-degrees of L(G) under B (number of non-backtracking successors).
    pub fn degrees(&self) -> Vec<f64> {
        self.b.rows().into_iter().map(|r| r.sum()).collect()
    }

    /// Binarised powers `B_j = min(1, B^{2^j})` for j = 1..=hops.
    pub fn b_powers(&self, hops: usize) -> Vec<Array2<f64>> {
        binary_powers(&self.b, hops)
    }
}

/// Build the directed line-graph view of a graph.
pub fn line_graph_view(g: &Graph) -> Result<LineGraphView, GraphError> {
    if g.edge_count() == 0 {
        return Err(GraphError::EmptyEdgeSet);
    }
    let n = g.n();
    let mut directed = Vec::with_capacity(2 * g.edge_count());
    for &(i, j, _) in g.edges() {
        directed.push((i, j));
        directed.push((j, i));
    }
    let m2 = directed.len();

    let mut b = Array2::zeros((m2, m2));
    for (a, &(i, j)) in directed.iter().enumerate() {
        for (c, &(k, l)) in directed.iter().enumerate() {
            if j == k && i != l {
                b[[a, c]] = 1.0;
            }
        }
    }

    let mut s = Array2::zeros((n, m2));
    let mut u = Array2::zeros((n, m2));
    for (c, &(k, l)) in directed.iter().enumerate() {
        s[[k, c]] = 1.0;
        s[[l, c]] = -1.0;
        u[[k, c]] = 1.0;
    }

    Ok(LineGraphView { directed, b, s, u })
}

/// Power adjacency matrices `A_j = min(1, A^{2^j})` for j = 1..=hops.
pub fn power_adjacency(g: &Graph, hops: usize) -> Vec<Array2<f64>> {
    binary_powers(&g.adjacency(), hops)
}

/// Binarised repeated squaring: `M_1 = min(1, M^2)`, `M_{j+1} = min(1, M_j^2)`.
///
/// Binarising between squarings preserves the positivity pattern of the true
/// powers `M^{2^j}` for non-negative M, and keeps entries at 0/1.
pub fn binary_powers(m: &Array2<f64>, hops: usize) -> Vec<Array2<f64>> {
    let mut out = Vec::with_capacity(hops);
    let mut cur = binarise(&m.dot(m));
    for _ in 0..hops {
        out.push(cur.clone());
        cur = binarise(&cur.dot(&cur));
    }
    out
}

fn binarise(m: &Array2<f64>) -> Array2<f64> {
    m.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        // a - b - c with a=0, b=1, c=2
        Graph::unweighted(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn path_has_the_expected_directed_nodes_and_b() {
        let view = line_graph_view(&path3()).unwrap();
        assert_eq!(view.directed_nodes(), &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        let slot = |t: (usize, usize)| view.directed_nodes().iter().position(|&d| d == t).unwrap();
        let b = view.non_backtracking();
        // a->b continues to b->c but may not backtrack to b->a
        assert_eq!(b[[slot((0, 1)), slot((1, 2))]], 1.0);
        assert_eq!(b[[slot((0, 1)), slot((1, 0))]], 0.0);
        assert_eq!(b[[slot((2, 1)), slot((1, 0))]], 1.0);
    }

    #[test]
    fn single_edge_has_zero_b() {
        let g = Graph::unweighted(2, [(0, 1)]).unwrap();
        let view = line_graph_view(&g).unwrap();
        assert_eq!(view.node_count(), 2);
        assert!(view.non_backtracking().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn triangle_has_one_successor_per_directed_edge() {
        let g = Graph::unweighted(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let view = line_graph_view(&g).unwrap();
        for row in view.non_backtracking().rows() {
            assert_eq!(row.sum(), 1.0);
        }
    }

    #[test]
    fn b_never_links_reversed_pairs() {
        let g = crate::graphs::random_regular(8, 3, 1).unwrap();
        let view = line_graph_view(&g).unwrap();
        let b = view.non_backtracking();
        for (a, &(i, j)) in view.directed_nodes().iter().enumerate() {
            for (c, &(k, l)) in view.directed_nodes().iter().enumerate() {
                if (k, l) == (j, i) {
                    assert_eq!(b[[a, c]], 0.0);
                }
            }
        }
    }

    #[test]
    fn incidence_column_structure() {
        let g = crate::graphs::random_regular(6, 3, 2).unwrap();
        let view = line_graph_view(&g).unwrap();
        for c in 0..view.node_count() {
            let ucol = view.unsigned_incidence().column(c);
            assert_eq!(ucol.sum(), 1.0);
            assert_eq!(ucol.iter().filter(|&&v| v != 0.0).count(), 1);
            let scol = view.signed_incidence().column(c);
            assert_eq!(scol.sum(), 0.0);
            assert_eq!(scol.iter().filter(|&&v| v != 0.0).count(), 2);
        }
    }

    #[test]
    fn path_power_adjacency_connects_endpoints() {
        let a = power_adjacency(&path3(), 1);
        // [A^2]_{ac} = 1, clamped to 1
        assert_eq!(a[0][[0, 2]], 1.0);
        assert_eq!(a[0][[2, 0]], 1.0);
    }

    #[test]
    fn k4_power_adjacency_is_all_ones() {
        let g = Graph::unweighted(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let a = power_adjacency(&g, 2);
        // A^2 of K4 has every entry >= 1 (diagonal = degree, off-diagonal >= 2)
        for m in &a {
            assert!(m.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn edgeless_graph_has_zero_powers() {
        let g = Graph::unweighted(4, []).unwrap();
        let a = power_adjacency(&g, 3);
        assert!(a.iter().all(|m| m.iter().all(|&v| v == 0.0)));
    }
}
