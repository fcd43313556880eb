use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::dataset::FigureDataset;
use crate::error::{Error, Result};
use crate::gbs::{ConditionalGBSDistribution, Explorer, GbsTweaker, SamplerKind, Tweaker, TweakParams, UniformExplorer, UniformTweaker};
use crate::linalg::{coe_matrix, ComplexMatrix, SqueezingSpec};
use crate::optimize::{
    brute_force_from_distribution, brute_force_maxhaf, greedy, random_search, simulated_annealing, Algorithm,
    AnnealSchedule, BruteForceResult, ObjectiveOracle, OptimizerRun,
};
use crate::pattern::PATTERN_GUARD;
use crate::rng::RandomStream;

/// Stream index reserved for generating the instance matrix from the base seed.
const MATRIX_STREAM: u64 = u64::MAX;

/// A problem instance with whatever GBS tables the solvers need.
#[derive(Debug, Clone)]
pub struct Instance {
    pub b: ComplexMatrix,
    pub r: f64,
    /// Conditional law over `k`-photon patterns (GBS exploration).
    pub dist_k: Option<ConditionalGBSDistribution>,
    /// Conditional law over `ℓ`-photon patterns (GBS tweaks).
    pub dist_ell: Option<ConditionalGBSDistribution>,
    /// Exact optimum, when enumeration fits under the pattern guard.
    pub optimum: Option<BruteForceResult>,
}

impl Instance {
    /// SHA-256 of the matrix's JSON form.
    pub fn matrix_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.b.to_json()?.as_bytes())))
    }
}

/// Loads `matrix_path` or draws a COE matrix from the config seed, then builds
/// the GBS tables: the `k`-photon law if `gbs`, plus the `ℓ`-photon law if
/// `gbs && tweaks`.
pub fn prepare_instance(cfg: &ExperimentConfig, gbs: bool, tweaks: bool) -> Result<Instance> {
    cfg.validate()?;
    let r = cfg.squeezing();
    let b = match &cfg.matrix_path {
        Some(p) => {
            let b = ComplexMatrix::load(p)?;
            if b.dim() != cfg.n {
                return Err(Error::invalid(format!("{} is {}x{}, config says n = {}", p.display(), b.dim(), b.dim(), cfg.n)));
            }
            b
        }
        None => coe_matrix(SqueezingSpec::new(r, cfg.n)?, &mut RandomStream::substream(cfg.seed, MATRIX_STREAM))?,
    };
    let dist_k = if gbs {
        log::info!("tabulating {} patterns for k = {}", cfg.pattern_count(), cfg.k);
        Some(ConditionalGBSDistribution::build(&b, cfg.k, r)?)
    } else {
        None
    };
    let dist_ell = if gbs && tweaks {
        TweakParams::new(cfg.ell, cfg.k)?;
        Some(ConditionalGBSDistribution::build(&b, cfg.ell, r)?)
    } else {
        None
    };
    let optimum = match &dist_k {
        Some(d) => Some(brute_force_from_distribution(d)?),
        None if cfg.pattern_count() <= PATTERN_GUARD => Some(brute_force_maxhaf(&b, cfg.k)?),
        None => None,
    };
    Ok(Instance { b, r, dist_k, dist_ell, optimum })
}

fn missing(what: &str) -> Error {
    Error::invalid(format!("instance was prepared without the {what} table"))
}

fn run_one(inst: &Instance, cfg: &ExperimentConfig, rng: &mut RandomStream) -> Result<OptimizerRun> {
    let uniform_explorer;
    let explorer: &dyn Explorer = match cfg.sampler {
        SamplerKind::Gbs => inst.dist_k.as_ref().ok_or_else(|| missing("k-photon"))?,
        SamplerKind::Uniform => {
            uniform_explorer = UniformExplorer::new(cfg.n, cfg.k)?;
            &uniform_explorer
        }
    };
    let mut oracle = ObjectiveOracle::new(&inst.b);
    match cfg.algorithm {
        Algorithm::RandomSearch => random_search(&mut oracle, cfg.k, cfg.budget, explorer, rng),
        Algorithm::Greedy => greedy(&mut oracle, cfg.k, cfg.greedy_repetitions(), explorer, rng),
        Algorithm::Annealing => {
            let params = TweakParams::new(cfg.ell, cfg.k)?;
            let sched = AnnealSchedule::new(cfg.t0, cfg.anneal_steps())?;
            let tweaker: Box<dyn Tweaker + '_> = match cfg.tweaker() {
                SamplerKind::Gbs => Box::new(GbsTweaker::new(params, inst.dist_ell.as_ref().ok_or_else(|| missing("ell-photon"))?)?),
                SamplerKind::Uniform => Box::new(UniformTweaker::new(params)?),
            };
            simulated_annealing(&mut oracle, cfg.k, sched, tweaker.as_ref(), explorer, rng)
        }
    }
}

/// Runs `cfg.repetitions` independent solver runs; repetition `i` uses the
/// stream seeded with `seed + i`. Runs execute in parallel and come back in
/// index order.
pub fn run_repetitions(inst: &Instance, cfg: &ExperimentConfig) -> Result<Vec<OptimizerRun>> {
    cfg.validate()?;
    (0..cfg.repetitions)
        .into_par_iter()
        .map(|i| run_one(inst, cfg, &mut RandomStream::new(cfg.seed.wrapping_add(i))))
        .collect()
}

/// Mean, sample standard deviation and standard error of the best-so-far
/// value after each query count `1..=max queries`, across runs.
pub fn summarize_runs(runs: &[OptimizerRun]) -> Vec<[f64; 3]> {
    let q_max = runs.iter().map(|r| r.queries).max().unwrap_or(0);
    let m = runs.len() as f64;
    (1..=q_max)
        .map(|q| {
            let vals: Vec<f64> = runs.iter().map(|r| r.best_at(q)).collect();
            let mean = vals.iter().sum::<f64>() / m;
            let var = if runs.len() > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let std = var.sqrt();
            [mean, std, std / m.sqrt()]
        })
        .collect()
}

pub(crate) fn optimum_json(opt: &Option<BruteForceResult>) -> serde_json::Value {
    match opt {
        Some(o) => json!({ "pattern": o.pattern, "value": o.value, "value_sq": o.value_sq }),
        None => serde_json::Value::Null,
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub dataset: FigureDataset,
    pub runs: Vec<OptimizerRun>,
    pub instance: Instance,
}

/// Full pipeline for one config: instance, repetitions, and a dataset with
/// columns `evaluations, mean, std, sem` (plus `optimum` when the instance
/// could be solved exactly).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let gbs = cfg.sampler == SamplerKind::Gbs;
    let tweaks = cfg.algorithm == Algorithm::Annealing && cfg.tweaker() == SamplerKind::Gbs;
    // a GBS tweak without GBS exploration still needs the ℓ-photon table
    let mut inst = prepare_instance(cfg, gbs, false)?;
    if tweaks {
        TweakParams::new(cfg.ell, cfg.k)?;
        inst.dist_ell = Some(ConditionalGBSDistribution::build(&inst.b, cfg.ell, inst.r)?);
    }
    let runs = run_repetitions(&inst, cfg)?;

    let mut columns: Vec<String> = ["evaluations", "mean", "std", "sem"].map(String::from).to_vec();
    if inst.optimum.is_some() {
        columns.push("optimum".into());
    }
    let id = match cfg.algorithm {
        Algorithm::Annealing => format!("annealing-{}-{}", cfg.sampler.as_str(), cfg.tweaker().as_str()),
        a => format!("{}-{}", a.as_str(), cfg.sampler.as_str()),
    };
    let mut ds = FigureDataset::new(id, columns);
    for (q, [mean, std, sem]) in summarize_runs(&runs).into_iter().enumerate() {
        let mut row = vec![(q + 1) as f64, mean, std, sem];
        if let Some(o) = inst.optimum {
            row.push(o.value);
        }
        ds.push_row(row)?;
    }
    let finals: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
    ds.metadata = json!({
        "config": cfg,
        "seed": cfg.seed,
        "r": inst.r,
        "matrix_sha256": inst.matrix_hash()?,
        "optimum": optimum_json(&inst.optimum),
        "final_mean": finals.iter().sum::<f64>() / finals.len() as f64,
        "tweak_fallbacks": runs.iter().map(|r| r.tweak_fallbacks).sum::<u64>(),
    });
    Ok(ExperimentOutput { dataset: ds, runs, instance: inst })
}
