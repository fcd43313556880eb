use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbs::{SamplerKind, TweakParams};
use crate::optimize::Algorithm;
use crate::pattern::{binomial, MAX_MODES};

/// Pattern counts above this need an explicit long-mode opt-in from the CLI.
pub const LONG_MODE_PATTERNS: u64 = 1_000_000;

/// Squeezing with mean photon number `n sinh²(r)` equal to `k`.
pub fn default_squeezing(n: usize, k: usize) -> f64 {
    (k as f64 / n as f64).sqrt().asinh()
}

/// One experiment: a problem instance, a solver, a randomness source and a
/// repetition count. Every field has a desk-scale default, so `{}` is a
/// valid config; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    /// Squeezing parameter; defaults to [`default_squeezing`].
    pub r: Option<f64>,
    pub algorithm: Algorithm,
    pub sampler: SamplerKind,
    /// Tweak source for annealing; defaults to `sampler`.
    pub tweaker: Option<SamplerKind>,
    /// Objective queries per repetition.
    pub budget: u64,
    pub repetitions: u64,
    pub ell: usize,
    pub t0: f64,
    pub seed: u64,
    pub matrix_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 12,
            k: 4,
            r: None,
            algorithm: Algorithm::RandomSearch,
            sampler: SamplerKind::Gbs,
            tweaker: None,
            budget: 200,
            repetitions: 100,
            ell: 2,
            t0: 3e-5,
            seed: 0,
            matrix_path: None,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// The n = 30, k = 10 protocol: ℓ = 6, t0 = 3·10⁻⁵, 1000 queries, 400 repetitions.
    pub fn paper_scale() -> Self {
        Self {
            n: 30,
            k: 10,
            ell: 6,
            t0: 3e-5,
            budget: 1000,
            repetitions: 400,
            ..Self::default()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }

    pub fn squeezing(&self) -> f64 {
        self.r.unwrap_or_else(|| default_squeezing(self.n, self.k))
    }

    pub fn tweaker(&self) -> SamplerKind {
        self.tweaker.unwrap_or(self.sampler)
    }

    /// Annealing steps: one query for the start plus one per step.
    pub fn anneal_steps(&self) -> u64 {
        self.budget.saturating_sub(1).max(1)
    }

    /// Greedy restarts whose total query count best matches the budget.
    pub fn greedy_repetitions(&self) -> u64 {
        let per = 1 + (self.k * (self.n - self.k + 1)) as u64;
        ((self.budget as f64 / per as f64).round() as u64).max(1)
    }

    pub fn pattern_count(&self) -> u64 {
        binomial(self.n as u64, self.k as u64).unwrap_or(u64::MAX)
    }

    pub fn requires_long_mode(&self) -> bool {
        self.pattern_count() > LONG_MODE_PATTERNS
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_MODES).contains(&self.n) {
            return Err(Error::invalid(format!("n = {} must lie in 2..={MAX_MODES}", self.n)));
        }
        if self.k < 2 || self.k % 2 == 1 || self.k > self.n {
            return Err(Error::invalid(format!("k = {} must be even with 2 <= k <= n", self.k)));
        }
        let r = self.squeezing();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("r = {r} must be positive and finite")));
        }
        if self.budget == 0 || self.repetitions == 0 {
            return Err(Error::invalid("budget and repetitions must be at least 1"));
        }
        if self.algorithm == Algorithm::Annealing {
            TweakParams::new(self.ell, self.k)?;
            if !(self.t0 > 0.0 && self.t0.is_finite()) {
                return Err(Error::invalid(format!("t0 = {} must be positive and finite", self.t0)));
            }
            if self.tweaker() == SamplerKind::Uniform && self.k >= self.n {
                return Err(Error::invalid("uniform tweaks need k < n"));
            }
        }
        Ok(())
    }
}
