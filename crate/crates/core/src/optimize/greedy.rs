use serde_json::json;

use super::oracle::ObjectiveOracle;
use super::run::{Algorithm, OptimizerRun, Tracker};
use crate::error::{Error, Result};
use crate::gbs::Explorer;
use crate::pattern::PhotonPattern;
use crate::rng::RandomStream;

/// Objective queries made by [`greedy`]: `repetitions · (1 + k (n - k + 1))`.
pub fn greedy_evaluations(n: usize, k: usize, repetitions: u64) -> u64 {
    repetitions * (1 + (k * (n - k + 1)) as u64)
}

/// Greedy coordinate ascent with restarts.
///
/// Each repetition draws a start from `explorer`, then for each of the `k`
/// slots in turn tries every mode not otherwise selected (the slot's current
/// mode included, `n - k + 1` candidates) and moves to the best one. The
/// incumbent wins ties, so plateaus never cause drift; among equally good
/// improvements the smallest mode wins. The best pattern over all repetitions is returned; the
/// trajectory spans all repetitions.
pub fn greedy(
    oracle: &mut ObjectiveOracle<'_>,
    k: usize,
    repetitions: u64,
    explorer: &dyn Explorer,
    rng: &mut RandomStream,
) -> Result<OptimizerRun> {
    if repetitions == 0 {
        return Err(Error::invalid("greedy needs at least one repetition"));
    }
    let n = oracle.n();
    let mut tracker = Tracker::new();
    for _ in 0..repetitions {
        let start = explorer.explore(rng);
        if start.k() != k {
            return Err(Error::invalid(format!("explorer produced {} photons, expected {k}", start.k())));
        }
        let v = oracle.value(&start)?;
        tracker.observe(oracle.queries(), start, v);

        let mut slots = start.indices();
        for i in 0..k {
            let others: u64 = slots
                .iter()
                .enumerate()
                .filter(|&(pos, _)| pos != i)
                .fold(0, |m, (_, &j)| m | 1 << j);
            let incumbent = slots[i];
            let mut incumbent_value = 0.0;
            let mut best: Option<(usize, f64)> = None;
            for j in (0..n).filter(|&j| others & (1 << j) == 0) {
                let candidate = PhotonPattern::from_mask(n, others | 1 << j)?;
                let v = oracle.value(&candidate)?;
                tracker.observe(oracle.queries(), candidate, v);
                if j == incumbent {
                    incumbent_value = v;
                }
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            slots[i] = match best {
                Some((j, v)) if v > incumbent_value => j,
                _ => incumbent,
            };
        }
    }
    let (best_pattern, best_value) = tracker.best();
    Ok(OptimizerRun {
        algorithm: Algorithm::Greedy,
        sampler: explorer.kind(),
        tweaker: None,
        seed: rng.seed(),
        config: json!({ "k": k, "repetitions": repetitions }),
        trajectory: tracker.trajectory,
        best_pattern,
        best_value,
        queries: oracle.queries(),
        eval_count: oracle.eval_count(),
        tweak_fallbacks: 0,
    })
}
