use serde_json::json;

use super::config::ExperimentConfig;
use super::dataset::FigureDataset;
use super::runner::{optimum_json, prepare_instance, run_repetitions, summarize_runs, Instance};
use crate::analysis::{alpha_coefficient, analytic_ratio_r, exp_density, expected_max_proportional, ExpFamilyParams};
use crate::error::{Error, Result};
use crate::gbs::SamplerKind;
use crate::optimize::{Algorithm, OptimizerRun};

/// Densities on the grid `y = 1/grid, …, 1`: `y, p_uniform, p_lambda_<λ>…`.
pub fn emit_figure1(lambdas: &[f64], grid: usize) -> Result<FigureDataset> {
    if grid < 2 {
        return Err(Error::invalid("figure 1 needs a grid of at least 2 points"));
    }
    let mut columns = vec!["y".to_string(), "p_uniform".to_string()];
    columns.extend(lambdas.iter().map(|l| format!("p_lambda_{l}")));
    let mut ds = FigureDataset::new("figure1", columns);
    for i in 1..=grid {
        let y = i as f64 / grid as f64;
        let mut row = vec![y, 1.0];
        for &l in lambdas {
            row.push(exp_density(l, y)?);
        }
        ds.push_row(row)?;
    }
    ds.metadata = json!({ "figure": 1, "lambdas": lambdas, "grid": grid });
    Ok(ds)
}

/// `α` against the number of draws: `kappa, alpha_uniform, alpha_lambda_<λ>…`.
pub fn emit_figure2(lambdas: &[f64], kappa_max: u32) -> Result<FigureDataset> {
    if kappa_max < 1 {
        return Err(Error::invalid("figure 2 needs kappa_max >= 1"));
    }
    let mut columns = vec!["kappa".to_string(), "alpha_uniform".to_string()];
    columns.extend(lambdas.iter().map(|l| format!("alpha_lambda_{l}")));
    let mut ds = FigureDataset::new("figure2", columns);
    for kappa in 1..=kappa_max {
        // 1 - κ/(κ+1) = 1/(κ+1) exactly
        let mut row = vec![kappa as f64, (kappa as f64 + 1.0).log10()];
        for &l in lambdas {
            row.push(alpha_coefficient(expected_max_proportional(ExpFamilyParams::new(l, kappa)?)?)?);
        }
        ds.push_row(row)?;
    }
    ds.metadata = json!({ "figure": 2, "lambdas": lambdas, "kappa_max": kappa_max });
    Ok(ds)
}

/// GBS-over-uniform ratio at `n = k²`: `k, n, R` for even `k = 2, …, k_max`.
pub fn emit_figure3(k_max: usize) -> Result<FigureDataset> {
    if k_max < 2 || k_max % 2 == 1 {
        return Err(Error::invalid(format!("figure 3 needs an even k_max >= 2, got {k_max}")));
    }
    let mut ds = FigureDataset::new("figure3", vec!["k".into(), "n".into(), "R".into()]);
    for k in (2..=k_max).step_by(2) {
        ds.push_row(vec![k as f64, (k * k) as f64, analytic_ratio_r(k * k, k)?])?;
    }
    ds.metadata = json!({ "figure": 3, "k_max": k_max });
    Ok(ds)
}

#[derive(Debug, Clone)]
pub struct Figure4Output {
    pub dataset: FigureDataset,
    /// Runs per `(algorithm, sampler)`, in the dataset's column order.
    pub runs: Vec<(Algorithm, SamplerKind, Vec<OptimizerRun>)>,
    pub instance: Instance,
}

/// Every algorithm with GBS and with uniform randomness on one instance.
///
/// `base` supplies the instance and protocol; its `algorithm`, `sampler` and
/// `tweaker` fields are overridden (annealing tweaks with the same source it
/// explores with). Columns: `evaluations`, then
/// `<algorithm>_<sampler>_{mean,std,sem}` for each pair, then `optimum` when
/// known. Curves that end early (greedy's query count is a multiple of its
/// sweep cost) hold their last value.
pub fn emit_figure4(base: &ExperimentConfig) -> Result<Figure4Output> {
    let probe = ExperimentConfig { algorithm: Algorithm::Annealing, ..base.clone() };
    probe.validate()?;
    let inst = prepare_instance(&probe, true, true)?;

    let mut runs = Vec::new();
    let mut columns = vec!["evaluations".to_string()];
    for alg in Algorithm::ALL {
        for sampler in [SamplerKind::Gbs, SamplerKind::Uniform] {
            let cfg = ExperimentConfig { algorithm: alg, sampler, tweaker: Some(sampler), ..base.clone() };
            log::info!("figure 4: {} / {}", alg.as_str(), sampler.as_str());
            runs.push((alg, sampler, run_repetitions(&inst, &cfg)?));
            for stat in ["mean", "std", "sem"] {
                columns.push(format!("{}_{}_{stat}", alg.as_str(), sampler.as_str()));
            }
        }
    }
    if inst.optimum.is_some() {
        columns.push("optimum".into());
    }
    let summaries: Vec<Vec<[f64; 3]>> = runs.iter().map(|(_, _, r)| summarize_runs(r)).collect();
    let q_max = summaries.iter().map(Vec::len).max().unwrap_or(0);
    let mut ds = FigureDataset::new("figure4", columns);
    for q in 0..q_max {
        let mut row = vec![(q + 1) as f64];
        for s in &summaries {
            row.extend_from_slice(&s[q.min(s.len() - 1)]);
        }
        if let Some(o) = inst.optimum {
            row.push(o.value);
        }
        ds.push_row(row)?;
    }
    let finals: serde_json::Map<String, serde_json::Value> = runs
        .iter()
        .map(|(a, s, r)| {
            let mean = r.iter().map(|x| x.best_value).sum::<f64>() / r.len() as f64;
            (format!("{}_{}", a.as_str(), s.as_str()), json!(mean))
        })
        .collect();
    ds.metadata = json!({
        "figure": 4,
        "config": base,
        "seed": base.seed,
        "r": inst.r,
        "matrix_sha256": inst.matrix_hash()?,
        "optimum": optimum_json(&inst.optimum),
        "anneal_steps": base.anneal_steps(),
        "greedy_repetitions": base.greedy_repetitions(),
        "final_mean": finals,
        "tweak_fallbacks": runs.iter().flat_map(|(_, _, r)| r.iter().map(|x| x.tweak_fallbacks)).sum::<u64>(),
    });
    Ok(Figure4Output { dataset: ds, runs, instance: inst })
}
