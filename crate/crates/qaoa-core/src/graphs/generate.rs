//! Random regular graphs via the configuration (pairing) model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};

const MAX_RETRIES: usize = 200;

/// Sample a simple k-regular graph on n nodes.
///
/// Stubs are paired uniformly at random; samples containing self-loops or
/// multi-edges are rejected wholesale and redrawn, up to 200 retries. The
/// same seed reproduces the same edge set bit-exactly.
pub fn random_regular(n: usize, k: usize, seed: u64) -> Result<Graph, GraphError> {
    if k >= n {
        return Err(GraphError::DegreeTooLarge { n, k });
    }
    if (n * k) % 2 != 0 {
        return Err(GraphError::OddDegreeSum { n, k });
    }
    if k == 0 {
        return Graph::unweighted(n, []);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(k)).collect();

    'retry: for _ in 0..MAX_RETRIES {
        stubs.shuffle(&mut rng);
        let mut seen = vec![false; n * n];
        let mut edges = Vec::with_capacity(n * k / 2);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b {
                continue 'retry;
            }
            let key = a.min(b) * n + a.max(b);
            if seen[key] {
                continue 'retry;
            }
            seen[key] = true;
            edges.push((a, b));
        }
        return Graph::unweighted(n, edges);
    }
    Err(GraphError::GenerationFailed { n, k, retries: MAX_RETRIES })
}
