//! Post-selected Gaussian boson sampling.
//!
//! With equal squeezing `r` on `n` modes and interferometer `U`, a
//! collision-free output pattern `S` occurs with probability
//! `|Haf(B_S)|² / cosh^n(r)` where `B = tanh(r) · U Uᵗ`. Conditioning on
//! exactly `k` photons in distinct modes leaves a law proportional to
//! `|Haf(B_S)|²` over the `C(n, k)` patterns, which is tabulated here
//! exactly and sampled by inverse CDF.

use std::io::{Read, Write};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hafnian::hafnian;
use crate::linalg::{submatrix_by_indices, ComplexMatrix};
use crate::pattern::{pattern_count, patterns, PhotonPattern, PATTERN_GUARD};
use crate::rng::RandomStream;

/// Default number of redraws [`gbs_tweak`] makes before giving up.
pub const TWEAK_RETRIES: usize = 10_000;

/// Probability `q_{n,r}(k)` that `n` equally squeezed modes emit exactly `k`
/// photons in total: `C((n+k)/2 - 1, k/2) · sech^n(r) · tanh^k(r)`.
///
/// The binomial has a half-integer top argument when `n` is odd and is
/// evaluated as the product `Π_{i=1}^{k/2} (n/2 - 1 + i) / i` in log space.
pub fn q_probability(n: usize, r: f64, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("q_probability needs n >= 1"));
    }
    if k % 2 == 1 {
        return Err(Error::invalid(format!("odd photon number {k} has probability zero by parity; pass an even k")));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::invalid(format!("squeezing r = {r} must be finite and >= 0")));
    }
    let half = k / 2;
    let ln_binom: f64 = (1..=half)
        .map(|i| ((n as f64 / 2.0 - 1.0 + i as f64) / i as f64).ln())
        .sum();
    let t = r.tanh();
    if half > 0 && t == 0.0 {
        return Ok(0.0);
    }
    let ln_sech = -(r.cosh().ln());
    let ln_tanh_term = if k == 0 { 0.0 } else { k as f64 * t.ln() };
    Ok((ln_binom + n as f64 * ln_sech + ln_tanh_term).exp())
}

/// Normalization metadata of a distribution built from a GBS matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbsNormalization {
    pub r: f64,
    /// `q_{n,r}(k)`.
    pub q: f64,
    /// Fraction of `k`-photon outcomes that are collision-free:
    /// `Σ|Haf(B_S)|² / (cosh^n(r) · q)`, clamped to `[0, 1]`.
    pub p_valid: f64,
}

/// `(mask, |Haf(B_S)|²)` for every `k`-photon pattern, in pattern order.
/// Hafnians are evaluated in parallel.
pub(crate) fn tabulate_weights(b: &ComplexMatrix, k: usize, limit: u64) -> Result<(Vec<u64>, Vec<f64>)> {
    if !b.is_symmetric() {
        return Err(Error::invalid("GBS distributions need a symmetric matrix"));
    }
    if k % 2 == 1 {
        return Err(Error::invalid(format!("photon number k = {k} must be even")));
    }
    let n = b.dim();
    pattern_count(n, k, limit)?;
    let masks: Vec<u64> = patterns(n, k)?.map(|p| p.mask()).collect();
    let weights: Vec<f64> = masks
        .par_iter()
        .map(|&mask| {
            let idx = PhotonPattern::from_mask(n, mask)?.indices();
            Ok(hafnian(&submatrix_by_indices(b, &idx))?.norm_sqr())
        })
        .collect::<Result<_>>()?;
    Ok((masks, weights))
}

/// Exact conditional law `Pr(S | S ∈ Γ_{S,k}) ∝ |Haf(B_S)|²`.
///
/// Patterns are held in lexicographic order of their index tuples (see
/// [`patterns`]).
#[derive(Debug, Clone)]
pub struct ConditionalGBSDistribution {
    n: usize,
    k: usize,
    masks: Vec<u64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total_weight: f64,
    normalization: Option<GbsNormalization>,
}

impl ConditionalGBSDistribution {
    /// Tabulates `|Haf(B_S)|²` over every `k`-photon collision-free pattern.
    ///
    /// Hafnians are evaluated in parallel; the normalizing sum and prefix
    /// sums are accumulated sequentially in pattern order.
    pub fn build(b: &ComplexMatrix, k: usize, r: f64) -> Result<Self> {
        Self::build_with_limit(b, k, r, PATTERN_GUARD)
    }

    pub fn build_with_limit(b: &ComplexMatrix, k: usize, r: f64, limit: u64) -> Result<Self> {
        let n = b.dim();
        let (masks, weights) = tabulate_weights(b, k, limit)?;
        let mut dist = Self::from_parts(n, k, masks, weights)?;
        let q = q_probability(n, r, k)?;
        let p_valid = if q > 0.0 {
            (dist.total_weight / (r.cosh().powi(n as i32) * q)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        dist.normalization = Some(GbsNormalization { r, q, p_valid });
        Ok(dist)
    }

    /// Distribution over explicit patterns with non-negative weights.
    /// Patterns must all have `n` modes and `k` photons.
    pub fn from_weights(patterns: &[PhotonPattern], weights: Vec<f64>) -> Result<Self> {
        let first = patterns
            .first()
            .ok_or_else(|| Error::DegenerateDistribution("no patterns".into()))?;
        let (n, k) = (first.n(), first.k());
        if patterns.len() != weights.len() {
            return Err(Error::invalid("pattern and weight counts differ"));
        }
        if patterns.iter().any(|p| p.n() != n || p.k() != k) {
            return Err(Error::invalid("patterns disagree on mode or photon count"));
        }
        Self::from_parts(n, k, patterns.iter().map(|p| p.mask()).collect(), weights)
    }

    fn from_parts(n: usize, k: usize, masks: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("weight {w} is not a finite non-negative number")));
        }
        let total_weight: f64 = weights.iter().sum();
        if total_weight <= 0.0 {
            return Err(Error::DegenerateDistribution(format!(
                "every {k}-photon pattern over {n} modes has weight zero"
            )));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total_weight
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self {
            n,
            k,
            masks,
            weights,
            cumulative,
            total_weight,
            normalization: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn pattern(&self, i: usize) -> PhotonPattern {
        PhotonPattern::from_mask(self.n, self.masks[i]).expect("masks are validated on construction")
    }

    pub fn patterns(&self) -> impl Iterator<Item = PhotonPattern> + '_ {
        (0..self.len()).map(|i| self.pattern(i))
    }

    /// `|Haf(B_S)|²` per pattern.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.weights[i] / self.total_weight
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total_weight).collect()
    }

    /// Non-decreasing prefix sums of the probabilities, ending at exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn normalization(&self) -> Option<GbsNormalization> {
        self.normalization
    }

    /// Position of `s` in the table, if present.
    pub fn index_of(&self, s: &PhotonPattern) -> Option<usize> {
        if s.n() != self.n || s.k() != self.k {
            return None;
        }
        // masks are in index-tuple lexicographic order, same as PhotonPattern's Ord
        self.masks
            .binary_search_by(|&m| PhotonPattern::from_mask(self.n, m).unwrap().cmp(s))
            .ok()
    }

    /// Inverse-CDF draw of a table index.
    pub fn sample_index(&self, rng: &mut RandomStream) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u).min(self.len() - 1)
    }

    /// Writes `pattern,weight,probability` rows with a header, in table order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["pattern", "weight", "probability"])?;
        for i in 0..self.len() {
            w.write_record([
                self.pattern(i).to_string(),
                format!("{:e}", self.weights[i]),
                format!("{:e}", self.probability(i)),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). Sampling uses
    /// the `weight` column; normalization metadata is not stored in the file.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["pattern", "weight", "probability"] {
            return Err(Error::invalid(format!("unexpected CSV header {headers:?}")));
        }
        let mut pats = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            pats.push(rec[0].parse::<PhotonPattern>()?);
            weights.push(
                rec[1]
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad weight {:?}: {e}", &rec[1])))?,
            );
        }
        if pats.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("distribution CSV rows are not in lexicographic pattern order"));
        }
        Self::from_weights(&pats, weights)
    }
}

/// `μ̂_U`, `μ̂_GBS` and their ratio for a tabulated distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageDiagnostics {
    /// Mean of `|Haf(B_S)|²` under uniform sampling.
    pub mu_u: f64,
    /// Mean of `|Haf(B_S)|²` under GBS sampling: `Σw² / Σw`.
    pub mu_gbs: f64,
    /// `mu_gbs / mu_u`, never below 1.
    pub ratio: f64,
}

pub fn gbs_advantage_diagnostics(dist: &ConditionalGBSDistribution) -> AdvantageDiagnostics {
    advantage_from_weights(dist.weights())
}

/// Diagnostics straight from a weight vector; at least one weight must be positive.
pub fn advantage_from_weights(weights: &[f64]) -> AdvantageDiagnostics {
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let mu_u = sum / weights.len() as f64;
    let mu_gbs = sum_sq / sum;
    AdvantageDiagnostics {
        mu_u,
        mu_gbs,
        ratio: mu_gbs / mu_u,
    }
}

/// Where exploration samples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Gbs,
    Uniform,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Gbs => "gbs",
            SamplerKind::Uniform => "uniform",
        }
    }
}

/// GBS-Explore: one draw from the conditional GBS law.
pub fn gbs_explore(dist: &ConditionalGBSDistribution, rng: &mut RandomStream) -> PhotonPattern {
    dist.pattern(dist.sample_index(rng))
}

/// Uniform draw over the `C(n, k)` patterns.
pub fn uniform_explore(n: usize, k: usize, rng: &mut RandomStream) -> Result<PhotonPattern> {
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    let chosen: Vec<usize> = index::sample(rng, n, k).into_vec();
    PhotonPattern::from_indices(n, &chosen)
}

/// Source of starting patterns for an optimizer.
pub trait Explorer: Sync {
    fn explore(&self, rng: &mut RandomStream) -> PhotonPattern;
    fn kind(&self) -> SamplerKind;
}

impl Explorer for ConditionalGBSDistribution {
    fn explore(&self, rng: &mut RandomStream) -> PhotonPattern {
        gbs_explore(self, rng)
    }

    fn kind(&self) -> SamplerKind {
        SamplerKind::Gbs
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniformExplorer {
    n: usize,
    k: usize,
}

impl UniformExplorer {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
        }
        Ok(Self { n, k })
    }
}

impl Explorer for UniformExplorer {
    fn explore(&self, rng: &mut RandomStream) -> PhotonPattern {
        uniform_explore(self.n, self.k, rng).expect("validated in UniformExplorer::new")
    }

    fn kind(&self) -> SamplerKind {
        SamplerKind::Uniform
    }
}

/// `ℓ`, the minimum number of photons a tweak keeps, and the target photon count `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweakParams {
    pub ell: usize,
    pub k: usize,
}

impl TweakParams {
    /// Requires `ℓ` even, `ℓ <= k - 2`, and `ℓ >= k - ℓ` so that a GBS draw
    /// with `ℓ` photons always has enough ones to refill the pattern.
    pub fn new(ell: usize, k: usize) -> Result<Self> {
        let p = Self { ell, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (ell, k) = (self.ell, self.k);
        if ell % 2 == 1 || k < 2 || ell > k - 2 {
            return Err(Error::invalid(format!("ell = {ell} must be even and at most k - 2 = {}", k as i64 - 2)));
        }
        if 2 * ell < k {
            return Err(Error::invalid(format!("ell = {ell} < k - ell = {}; a GBS refill cannot supply enough photons", k - ell)));
        }
        Ok(())
    }
}

/// Step 1 shared by both tweaks: draw `L ∈ {0, …, k-ℓ-1}` and keep `ℓ + L`
/// of the ones of `s` uniformly at random. Returns `(S′, L)`.
fn keep_subset(s: &PhotonPattern, params: &TweakParams, rng: &mut RandomStream) -> Result<(PhotonPattern, usize)> {
    let span = params.k - params.ell;
    let extra = rng.random_range(0..span);
    let ones = s.indices();
    let keep: Vec<usize> = index::sample(rng, ones.len(), params.ell + extra)
        .into_iter()
        .map(|i| ones[i])
        .collect();
    Ok((PhotonPattern::from_indices(s.n(), &keep)?, extra))
}

fn check_tweak_input(s: &PhotonPattern, params: &TweakParams) -> Result<()> {
    params.validate()?;
    if s.k() != params.k {
        return Err(Error::invalid(format!("pattern has {} photons, tweak expects {}", s.k(), params.k)));
    }
    Ok(())
}

/// GBS-Tweak with the default retry budget.
pub fn gbs_tweak(
    s: &PhotonPattern,
    params: &TweakParams,
    dist_ell: &ConditionalGBSDistribution,
    rng: &mut RandomStream,
) -> Result<PhotonPattern> {
    gbs_tweak_with_retries(s, params, dist_ell, rng, TWEAK_RETRIES)
}

/// GBS-Tweak: keep `ℓ + L` ones of `s`, then fill the remaining `k - ℓ - L`
/// slots with a random subset of an `ℓ`-photon GBS draw, redrawing whenever
/// the subset collides with the kept ones. Fails with
/// [`Error::TweakFailure`] after `retries` collisions.
pub fn gbs_tweak_with_retries(
    s: &PhotonPattern,
    params: &TweakParams,
    dist_ell: &ConditionalGBSDistribution,
    rng: &mut RandomStream,
    retries: usize,
) -> Result<PhotonPattern> {
    check_tweak_input(s, params)?;
    if dist_ell.k() != params.ell || dist_ell.n() != s.n() {
        return Err(Error::invalid(format!(
            "refill distribution is over ({}, {}) but the tweak needs ({}, {})",
            dist_ell.n(),
            dist_ell.k(),
            s.n(),
            params.ell
        )));
    }
    let (kept, extra) = keep_subset(s, params, rng)?;
    let need = params.k - params.ell - extra;
    for _ in 0..retries {
        let t = gbs_explore(dist_ell, rng);
        let t_ones = t.indices();
        let fill: Vec<usize> = index::sample(rng, t_ones.len(), need)
            .into_iter()
            .map(|i| t_ones[i])
            .collect();
        let fill = PhotonPattern::from_indices(s.n(), &fill)?;
        if fill.overlap(&kept) == 0 {
            return kept.union(&fill);
        }
    }
    Err(Error::TweakFailure { retries })
}

/// Uniform tweak: as GBS-Tweak, but the `k - ℓ - L` new modes are drawn
/// uniformly from the empty modes of `S′`. Needs `k < n`.
pub fn uniform_tweak(s: &PhotonPattern, params: &TweakParams, rng: &mut RandomStream) -> Result<PhotonPattern> {
    check_tweak_input(s, params)?;
    if params.k >= s.n() {
        return Err(Error::invalid(format!("uniform tweak needs k < n (k = {}, n = {})", params.k, s.n())));
    }
    let (kept, extra) = keep_subset(s, params, rng)?;
    let need = params.k - params.ell - extra;
    let zeros: Vec<usize> = kept.zeros().collect();
    let fill: Vec<usize> = index::sample(rng, zeros.len(), need)
        .into_iter()
        .map(|i| zeros[i])
        .collect();
    kept.union(&PhotonPattern::from_indices(s.n(), &fill)?)
}

/// Local modification step for an optimizer.
pub trait Tweaker: Sync {
    fn tweak(&self, s: &PhotonPattern, rng: &mut RandomStream) -> Result<PhotonPattern>;
    fn kind(&self) -> SamplerKind;
    fn params(&self) -> TweakParams;
}

pub struct GbsTweaker<'a> {
    params: TweakParams,
    dist_ell: &'a ConditionalGBSDistribution,
    retries: usize,
}

impl<'a> GbsTweaker<'a> {
    pub fn new(params: TweakParams, dist_ell: &'a ConditionalGBSDistribution) -> Result<Self> {
        params.validate()?;
        if dist_ell.k() != params.ell {
            return Err(Error::invalid(format!(
                "refill distribution has {} photons, ell = {}",
                dist_ell.k(),
                params.ell
            )));
        }
        Ok(Self {
            params,
            dist_ell,
            retries: TWEAK_RETRIES,
        })
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries;
        self
    }
}

impl Tweaker for GbsTweaker<'_> {
    fn tweak(&self, s: &PhotonPattern, rng: &mut RandomStream) -> Result<PhotonPattern> {
        gbs_tweak_with_retries(s, &self.params, self.dist_ell, rng, self.retries)
    }

    fn kind(&self) -> SamplerKind {
        SamplerKind::Gbs
    }

    fn params(&self) -> TweakParams {
        self.params
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniformTweaker {
    params: TweakParams,
}

impl UniformTweaker {
    pub fn new(params: TweakParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl Tweaker for UniformTweaker {
    fn tweak(&self, s: &PhotonPattern, rng: &mut RandomStream) -> Result<PhotonPattern> {
        uniform_tweak(s, &self.params, rng)
    }

    fn kind(&self) -> SamplerKind {
        SamplerKind::Uniform
    }

    fn params(&self) -> TweakParams {
        self.params
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{coe_matrix, SqueezingSpec};
    use num_complex::Complex64;

    fn coe(n: usize, seed: u64) -> ComplexMatrix {
        coe_matrix(SqueezingSpec::new(0.8, n).unwrap(), &mut RandomStream::new(seed)).unwrap()
    }

    #[test]
    fn q_small_cases() {
        let r = 0.7;
        assert!((q_probability(5, r, 0).unwrap() - (1.0 / r.cosh()).powi(5)).abs() < 1e-15);
        let r = 0.5f64.atanh();
        assert!((q_probability(2, r, 2).unwrap() - 0.1875).abs() < 1e-15);
        assert_eq!(q_probability(3, 0.4, 3).unwrap_err().kind(), "invalid-argument");
        assert_eq!(q_probability(3, 0.0, 2).unwrap(), 0.0);
        assert_eq!(q_probability(3, 0.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn q_sums_to_one() {
        for n in [1usize, 4, 7] {
            let total: f64 = (0..=400).step_by(2).map(|k| q_probability(n, 0.6, k).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n} total={total}");
        }
    }

    #[test]
    fn distribution_is_normalized() {
        let d = ConditionalGBSDistribution::build(&coe(8, 1), 4, 0.8).unwrap();
        assert_eq!(d.len(), 70);
        let total: f64 = d.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(d.cumulative().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*d.cumulative().last().unwrap(), 1.0);
        let norm = d.normalization().unwrap();
        assert!(norm.p_valid > 0.0 && norm.p_valid <= 1.0);
    }

    #[test]
    fn k2_probabilities_are_offdiagonal_moduli() {
        let b = coe(6, 3);
        let d = ConditionalGBSDistribution::build(&b, 2, 0.8).unwrap();
        let w: Vec<f64> = d.patterns().map(|p| {
            let i = p.indices();
            b.get(i[0], i[1]).norm_sqr()
        }).collect();
        let s: f64 = w.iter().sum();
        for (i, wi) in w.iter().enumerate() {
            assert!((d.probability(i) - wi / s).abs() < 1e-14);
        }
    }

    #[test]
    fn single_support_pattern() {
        // only the pair (1, 3) is connected
        let b = ComplexMatrix::adjacency(5, &[(1, 3)]).unwrap();
        let d = ConditionalGBSDistribution::build(&b, 2, 0.5).unwrap();
        let idx = d.index_of(&PhotonPattern::from_indices(5, &[1, 3]).unwrap()).unwrap();
        assert_eq!(d.probability(idx), 1.0);
        let mut rng = RandomStream::new(0);
        for _ in 0..100 {
            assert_eq!(gbs_explore(&d, &mut rng).indices(), vec![1, 3]);
        }
    }

    #[test]
    fn constant_matrix_is_uniform() {
        let b = ComplexMatrix::from_fn(6, |_, _| Complex64::new(0.3, 0.1));
        let d = ConditionalGBSDistribution::build(&b, 4, 0.5).unwrap();
        for p in d.probabilities() {
            assert!((p - 1.0 / 15.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let z = ComplexMatrix::zeros(5);
        assert_eq!(ConditionalGBSDistribution::build(&z, 2, 0.5).unwrap_err().kind(), "degenerate-distribution");
        assert_eq!(ConditionalGBSDistribution::build(&coe(5, 0), 3, 0.5).unwrap_err().kind(), "invalid-argument");
        let asym = ComplexMatrix::from_fn(4, |i, j| Complex64::new((i * 4 + j) as f64, 0.0));
        assert_eq!(ConditionalGBSDistribution::build(&asym, 2, 0.5).unwrap_err().kind(), "invalid-argument");
        assert_eq!(
            ConditionalGBSDistribution::build_with_limit(&coe(10, 0), 4, 0.5, 100).unwrap_err().kind(),
            "resource-limit"
        );
    }

    #[test]
    fn diagnostics_examples() {
        let d = advantage_from_weights(&[2.0, 2.0, 2.0]);
        assert!((d.ratio - 1.0).abs() < 1e-15);
        let d = advantage_from_weights(&[1.0, 0.0, 0.0, 0.0]);
        assert!((d.ratio - 4.0).abs() < 1e-15);
        let d = advantage_from_weights(&[1.0, 2.0, 3.0]);
        assert!((d.mu_u - 2.0).abs() < 1e-15);
        assert!((d.mu_gbs - 14.0 / 6.0).abs() < 1e-15);
        assert!((d.ratio - 7.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_explore_edges() {
        let mut rng = RandomStream::new(1);
        assert_eq!(uniform_explore(5, 5, &mut rng).unwrap().k(), 5);
        assert_eq!(uniform_explore(5, 0, &mut rng).unwrap().mask(), 0);
        assert!(uniform_explore(3, 4, &mut rng).is_err());
    }

    #[test]
    fn tweak_params_validation() {
        assert!(TweakParams::new(2, 4).is_ok());
        assert!(TweakParams::new(6, 10).is_ok());
        assert!(TweakParams::new(4, 10).is_err()); // 4 < 6
        assert!(TweakParams::new(3, 6).is_err());
        assert!(TweakParams::new(4, 4).is_err());
        assert!(TweakParams::new(0, 0).is_err());
    }

    #[test]
    fn gbs_tweak_deterministic_refill() {
        // ℓ = k - 2 forces L = 0; the ℓ-photon law is a single atom on {6, 7}
        let n = 8;
        let params = TweakParams::new(2, 4).unwrap();
        let b = ComplexMatrix::adjacency(n, &[(6, 7)]).unwrap();
        let dist2 = ConditionalGBSDistribution::build(&b, 2, 0.5).unwrap();
        let s = PhotonPattern::from_indices(n, &[0, 1, 2, 3]).unwrap();
        let mut rng = RandomStream::new(5);
        for _ in 0..200 {
            let r = gbs_tweak(&s, &params, &dist2, &mut rng).unwrap();
            assert_eq!(r.k(), 4);
            assert!(r.contains(6) || r.contains(7));
            assert!(r.overlap(&s) >= 2);
        }
        // with L = 0 the refill takes both 6 and 7 and exactly two of s survive
        let mut saw_full_refill = false;
        for _ in 0..200 {
            let r = gbs_tweak(&s, &params, &dist2, &mut rng).unwrap();
            if r.contains(6) && r.contains(7) {
                assert_eq!(r.overlap(&s), 2);
                saw_full_refill = true;
            }
        }
        assert!(saw_full_refill);
    }

    #[test]
    fn gbs_tweak_exhausts_retries() {
        // the only ℓ-photon pattern sits inside s, so every refill collides once L = 1
        let n = 6;
        let params = TweakParams::new(2, 4).unwrap();
        let b = ComplexMatrix::adjacency(n, &[(0, 1)]).unwrap();
        let dist2 = ConditionalGBSDistribution::build(&b, 2, 0.5).unwrap();
        let s = PhotonPattern::from_indices(n, &[0, 1, 2, 3]).unwrap();
        let mut rng = RandomStream::new(9);
        let mut failures = 0;
        for _ in 0..50 {
            match gbs_tweak_with_retries(&s, &params, &dist2, &mut rng, 20) {
                Err(Error::TweakFailure { retries: 20 }) => failures += 1,
                Ok(r) => assert_eq!(r.k(), 4),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn tweak_input_checks() {
        let params = TweakParams::new(2, 4).unwrap();
        let mut rng = RandomStream::new(0);
        let s3 = PhotonPattern::from_indices(6, &[0, 1, 2]).unwrap();
        assert!(uniform_tweak(&s3, &params, &mut rng).is_err());
        let full = PhotonPattern::full(4).unwrap();
        assert_eq!(uniform_tweak(&full, &params, &mut rng).unwrap_err().kind(), "invalid-argument");
        let d4 = ConditionalGBSDistribution::build(&coe(6, 0), 4, 0.5).unwrap();
        let s = PhotonPattern::from_indices(6, &[0, 1, 2, 3]).unwrap();
        assert!(gbs_tweak(&s, &params, &d4, &mut rng).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = ConditionalGBSDistribution::build(&coe(6, 2), 2, 0.5).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("pattern,weight,probability\n110000,"));
        assert!(!text.contains('\r'));
        let back = ConditionalGBSDistribution::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.weights(), d.weights());
        assert_eq!(back.cumulative(), d.cumulative());
    }
}
