use serde::{Deserialize, Serialize};

use crate::gbs::SamplerKind;
use crate::pattern::PhotonPattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    RandomSearch,
    Annealing,
    Greedy,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::RandomSearch => "random-search",
            Algorithm::Annealing => "annealing",
            Algorithm::Greedy => "greedy",
        }
    }

    pub const ALL: [Algorithm; 3] = [Algorithm::RandomSearch, Algorithm::Annealing, Algorithm::Greedy];
}

/// Outcome of one solver run.
///
/// `trajectory` holds `(queries, best value so far)` breakpoints, one per
/// improvement, starting with the first query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerRun {
    pub algorithm: Algorithm,
    pub sampler: SamplerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tweaker: Option<SamplerKind>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub trajectory: Vec<(u64, f64)>,
    pub best_pattern: PhotonPattern,
    pub best_value: f64,
    pub queries: u64,
    pub eval_count: u64,
    /// GBS tweaks that ran out of retries and used a uniform tweak instead.
    #[serde(default)]
    pub tweak_fallbacks: u64,
}

impl OptimizerRun {
    /// Best value after `queries` objective queries (0 before the first).
    pub fn best_at(&self, queries: u64) -> f64 {
        let i = self.trajectory.partition_point(|&(q, _)| q <= queries);
        if i == 0 {
            0.0
        } else {
            self.trajectory[i - 1].1
        }
    }
}

/// Running maximum with breakpoint recording.
pub(crate) struct Tracker {
    pub trajectory: Vec<(u64, f64)>,
    pub best: Option<(PhotonPattern, f64)>,
}

impl Tracker {
    pub fn new() -> Self {
        Self {
            trajectory: Vec::new(),
            best: None,
        }
    }

    pub fn observe(&mut self, queries: u64, s: PhotonPattern, value: f64) {
        if self.best.map_or(true, |(_, b)| value > b) {
            self.best = Some((s, value));
            self.trajectory.push((queries, value));
        }
    }

    pub fn best(&self) -> (PhotonPattern, f64) {
        self.best.expect("tracker observed at least one pattern")
    }
}
