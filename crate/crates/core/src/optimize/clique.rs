use crate::error::{Error, Result};
use crate::hafnian::matching_count;
use crate::linalg::ComplexMatrix;

use super::brute::brute_force_maxhaf;

/// Relative tolerance when comparing `max |Haf|²` against `((k-1)!!)²`.
pub const ADJACENCY_TOLERANCE: f64 = 1e-9;

/// Largest even clique size of a graph, found with Max-Haf queries.
///
/// For a 0/1 adjacency matrix the Hafnian of a `k`-vertex induced subgraph
/// counts its perfect matchings, which is at most `(k-1)!!` with equality
/// exactly for `K_k`. Scanning even `k` downward, the first `k` whose Max-Haf
/// optimum reaches `(k-1)!!` is the answer. Odd cliques are invisible (odd
/// Hafnians vanish), so the clique number is the result or the result plus one.
pub fn max_clique_via_maxhaf(adjacency: &ComplexMatrix) -> Result<usize> {
    let n = adjacency.dim();
    for i in 0..n {
        for j in 0..n {
            let z = adjacency.get(i, j);
            let ok = z.im == 0.0 && (z.re == 0.0 || (z.re == 1.0 && i != j)) && z == adjacency.get(j, i);
            if !ok {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) = {z} is not a symmetric zero-diagonal 0/1 adjacency entry"
                )));
            }
        }
    }
    let top = n - n % 2;
    for k in (2..=top).rev().step_by(2) {
        let target = matching_count(k / 2)? as f64;
        let best = brute_force_maxhaf(adjacency, k)?;
        if (best.value_sq - target * target).abs() <= ADJACENCY_TOLERANCE * target * target {
            return Ok(k);
        }
    }
    Ok(0)
}
