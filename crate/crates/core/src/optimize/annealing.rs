use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::oracle::ObjectiveOracle;
use super::run::{Algorithm, OptimizerRun, Tracker};
use crate::error::{Error, Result};
use crate::gbs::{uniform_tweak, Explorer, Tweaker};
use crate::rng::RandomStream;

/// Linear cooling: `t(a) = t0 · (1 - a / steps)` for `a = 0, …, steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub steps: u64,
}

impl AnnealSchedule {
    pub fn new(t0: f64, steps: u64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::invalid(format!("initial temperature {t0} must be positive and finite")));
        }
        if steps == 0 {
            return Err(Error::invalid("annealing needs at least one step"));
        }
        Ok(Self { t0, steps })
    }

    pub fn temperature(&self, a: u64) -> f64 {
        self.t0 * (1.0 - a.min(self.steps) as f64 / self.steps as f64)
    }
}

/// One proposal as seen by an observer of [`simulated_annealing_observed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealStep {
    pub step: u64,
    pub temperature: f64,
    pub current: f64,
    pub proposal: f64,
    pub accepted: bool,
}

/// Metropolis acceptance of a move from `current` to `proposal` at temperature `t`.
fn accept(current: f64, proposal: f64, t: f64, rng: &mut RandomStream) -> bool {
    if proposal > current {
        return true;
    }
    if t <= 0.0 {
        return false;
    }
    let p = ((proposal - current) / t).exp();
    rng.random::<f64>() < p
}

/// Simulated annealing over `k`-photon patterns.
///
/// Starts from one explorer draw, then for `a = 1, …, steps` proposes a tweak
/// of the current pattern and accepts it if it is better, or otherwise with
/// probability `exp((|Haf(B_R)| - |Haf(B_S)|) / t(a))`. The last step runs at
/// `t = 0`, where only strict improvements are accepted. Uses `steps + 1`
/// objective queries.
///
/// A GBS tweak that exhausts its retries is replaced by a uniform tweak and
/// counted in [`OptimizerRun::tweak_fallbacks`].
pub fn simulated_annealing(
    oracle: &mut ObjectiveOracle<'_>,
    k: usize,
    sched: AnnealSchedule,
    tweaker: &dyn Tweaker,
    explorer: &dyn Explorer,
    rng: &mut RandomStream,
) -> Result<OptimizerRun> {
    simulated_annealing_observed(oracle, k, sched, tweaker, explorer, rng, &mut |_| {})
}

/// [`simulated_annealing`] reporting every proposal to `observe`.
pub fn simulated_annealing_observed(
    oracle: &mut ObjectiveOracle<'_>,
    k: usize,
    sched: AnnealSchedule,
    tweaker: &dyn Tweaker,
    explorer: &dyn Explorer,
    rng: &mut RandomStream,
    observe: &mut dyn FnMut(AnnealStep),
) -> Result<OptimizerRun> {
    let params = tweaker.params();
    if params.k != k {
        return Err(Error::invalid(format!("tweaker targets {} photons, expected {k}", params.k)));
    }
    let mut tracker = Tracker::new();
    let mut current = explorer.explore(rng);
    let mut current_value = oracle.value(&current)?;
    tracker.observe(oracle.queries(), current, current_value);
    let mut fallbacks = 0u64;
    for a in 1..=sched.steps {
        let proposal = match tweaker.tweak(&current, rng) {
            Ok(r) => r,
            Err(Error::TweakFailure { retries }) => {
                log::warn!("GBS tweak gave up after {retries} retries at step {a}; using a uniform tweak");
                fallbacks += 1;
                uniform_tweak(&current, &params, rng)?
            }
            Err(e) => return Err(e),
        };
        let value = oracle.value(&proposal)?;
        let temperature = sched.temperature(a);
        let accepted = accept(current_value, value, temperature, rng);
        observe(AnnealStep {
            step: a,
            temperature,
            current: current_value,
            proposal: value,
            accepted,
        });
        if accepted {
            current = proposal;
            current_value = value;
        }
        tracker.observe(oracle.queries(), current, current_value);
    }
    let (best_pattern, best_value) = tracker.best();
    Ok(OptimizerRun {
        algorithm: Algorithm::Annealing,
        sampler: explorer.kind(),
        tweaker: Some(tweaker.kind()),
        seed: rng.seed(),
        config: json!({
            "k": k,
            "ell": params.ell,
            "t0": sched.t0,
            "steps": sched.steps,
        }),
        trajectory: tracker.trajectory,
        best_pattern,
        best_value,
        queries: oracle.queries(),
        eval_count: oracle.eval_count(),
        tweak_fallbacks: fallbacks,
    })
}
