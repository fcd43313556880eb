use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbs::{tabulate_weights, ConditionalGBSDistribution};
use crate::linalg::ComplexMatrix;
use crate::pattern::{PhotonPattern, PATTERN_GUARD};

/// Exact Max-Haf optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub pattern: PhotonPattern,
    /// `|Haf(B_S)|`.
    pub value: f64,
    /// `|Haf(B_S)|²`.
    pub value_sq: f64,
}

fn argmax(n: usize, masks: &[u64], weights: &[f64]) -> Result<BruteForceResult> {
    let mut best: Option<usize> = None;
    for (i, &w) in weights.iter().enumerate() {
        // strict: ties keep the lexicographically smallest pattern
        if best.map_or(true, |b| w > weights[b]) {
            best = Some(i);
        }
    }
    let i = best.ok_or_else(|| Error::invalid("no candidate patterns"))?;
    Ok(BruteForceResult {
        pattern: PhotonPattern::from_mask(n, masks[i])?,
        value: weights[i].sqrt(),
        value_sq: weights[i],
    })
}

/// Scans all `C(n, k)` patterns for the largest `|Haf(B_S)|`.
pub fn brute_force_maxhaf(b: &ComplexMatrix, k: usize) -> Result<BruteForceResult> {
    let (masks, weights) = tabulate_weights(b, k, PATTERN_GUARD)?;
    argmax(b.dim(), &masks, &weights)
}

/// Same as [`brute_force_maxhaf`], reusing an already tabulated distribution.
pub fn brute_force_from_distribution(dist: &ConditionalGBSDistribution) -> Result<BruteForceResult> {
    let masks: Vec<u64> = dist.patterns().map(|p| p.mask()).collect();
    argmax(dist.n(), &masks, dist.weights())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_selection() {
        let b = ComplexMatrix::adjacency(4, &[(0, 1), (2, 3)]).unwrap();
        let r = brute_force_maxhaf(&b, 4).unwrap();
        assert_eq!(r.pattern.to_string(), "1111");
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn k4_plus_isolated_vertices() {
        let b = ComplexMatrix::adjacency(6, &[(1, 2), (1, 3), (1, 5), (2, 3), (2, 5), (3, 5)]).unwrap();
        let r = brute_force_maxhaf(&b, 4).unwrap();
        assert_eq!(r.pattern.indices(), vec![1, 2, 3, 5]);
        assert_eq!(r.value, 3.0);
        assert_eq!(r.value_sq, 9.0);
    }

    #[test]
    fn ties_go_to_first_pattern() {
        let b = ComplexMatrix::zeros(5);
        let r = brute_force_maxhaf(&b, 2).unwrap();
        assert_eq!(r.pattern.to_string(), "11000");
        assert_eq!(r.value, 0.0);
    }
}
