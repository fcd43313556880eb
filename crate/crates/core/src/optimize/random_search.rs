use serde_json::json;

use super::oracle::ObjectiveOracle;
use super::run::{Algorithm, OptimizerRun, Tracker};
use crate::error::{Error, Result};
use crate::gbs::Explorer;
use crate::rng::RandomStream;

/// Draws `budget` patterns from `explorer` and keeps the best.
pub fn random_search(
    oracle: &mut ObjectiveOracle<'_>,
    k: usize,
    budget: u64,
    explorer: &dyn Explorer,
    rng: &mut RandomStream,
) -> Result<OptimizerRun> {
    if budget == 0 {
        return Err(Error::invalid("random search needs a budget of at least 1"));
    }
    let mut tracker = Tracker::new();
    for _ in 0..budget {
        let s = explorer.explore(rng);
        if s.k() != k {
            return Err(Error::invalid(format!("explorer produced {} photons, expected {k}", s.k())));
        }
        let v = oracle.value(&s)?;
        tracker.observe(oracle.queries(), s, v);
    }
    let (best_pattern, best_value) = tracker.best();
    Ok(OptimizerRun {
        algorithm: Algorithm::RandomSearch,
        sampler: explorer.kind(),
        tweaker: None,
        seed: rng.seed(),
        config: json!({ "k": k, "budget": budget }),
        trajectory: tracker.trajectory,
        best_pattern,
        best_value,
        queries: oracle.queries(),
        eval_count: oracle.eval_count(),
        tweak_fallbacks: 0,
    })
}
