//! Exact Max-Cut by exhaustive enumeration.

use super::{CutAssignment, Graph, GraphError};

/// Hard cap on oracle size; 2^25 sign patterns is the most we are willing to
/// enumerate.
pub const ORACLE_MAX_NODES: usize = 26;

/// Exact maximum cut via enumeration over 2^{n-1} sign patterns.
///
/// Node 0 is fixed to spin +1: a global spin flip leaves every cut invariant,
/// so half the patterns suffice. Refuses graphs above [`ORACLE_MAX_NODES`]
/// rather than approximating. Ties resolve to the lexicographically smallest
/// bit pattern, so the result is deterministic.
pub fn max_cut_oracle(g: &Graph) -> Result<CutAssignment, GraphError> {
    let n = g.n();
    if n > ORACLE_MAX_NODES {
        return Err(GraphError::OracleCapExceeded { n, cap: ORACLE_MAX_NODES });
    }
    if n == 0 {
        return Ok(CutAssignment { z: vec![], cut_value: 0.0 });
    }

    // Spin of node i is -1 when bit i of the mask is set; node 0's bit stays 0.
    let edges = g.edges();
    let mut best_mask = 0u64;
    let mut best_cut = f64::NEG_INFINITY;
    for mask in 0..(1u64 << (n - 1)) {
        let mask = mask << 1;
        let mut cut = 0.0;
        for &(i, j, w) in edges {
            if ((mask >> i) ^ (mask >> j)) & 1 == 1 {
                cut += w;
            }
        }
        if cut > best_cut {
            best_cut = cut;
            best_mask = mask;
        }
    }
    let z: Vec<i8> = (0..n).map(|i| if (best_mask >> i) & 1 == 1 { -1 } else { 1 }).collect();
    Ok(CutAssignment { z, cut_value: best_cut })
}
