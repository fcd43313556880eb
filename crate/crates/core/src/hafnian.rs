//! Hafnians, perfect matchings, and the Gaussian-ensemble moment identities.
//!
//! `Haf(X) = Σ_{σ ∈ PMP(2m)} Π_j X[σ(2j-1)][σ(2j)]` for a `2m x 2m` matrix;
//! odd-dimensional matrices have Hafnian zero and the empty matrix has
//! Hafnian one. Only off-diagonal entries are ever read.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_symmetric, ComplexMatrix};
use crate::rng::RandomStream;
use rand::RngCore;

/// Largest `m` for which perfect matchings of `2m` points are enumerated;
/// `(2·9 − 1)!! ≈ 3.4e7`, the next size up is `6.5e8`.
pub const MAX_PMP_HALF: usize = 9;

/// Largest matrix dimension accepted by [`hafnian`].
pub const MAX_HAFNIAN_DIM: usize = 24;

/// Largest `m` accepted by the cycle-sum verifier.
pub const MAX_CYCLE_HALF: usize = 8;

/// Largest `k` for which `k!!` fits in a `u64`.
pub const MAX_DOUBLE_FACTORIAL: u32 = 33;

/// A pairing of `{0, …, 2m-1}` into `m` unordered pairs.
///
/// Pairs are stored `(low, high)` and sorted by their low element, so each
/// matching has exactly one representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PerfectMatching {
    pairs: Vec<(usize, usize)>,
}

impl PerfectMatching {
    /// Canonicalizes `pairs` and checks that they partition `0..2m`.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let size = 2 * pairs.len();
        let mut seen = vec![false; size];
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        for &(a, b) in &pairs {
            for i in [a, b] {
                if i >= size || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::invalid(format!("pairs do not partition 0..{size}")));
                }
            }
        }
        pairs.sort_unstable();
        Ok(Self { pairs })
    }

    /// `{(0,1), (2,3), …}`.
    pub fn identity(m: usize) -> Self {
        Self {
            pairs: (0..m).map(|j| (2 * j, 2 * j + 1)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of pairs `m`.
    pub fn half_size(&self) -> usize {
        self.pairs.len()
    }
}

/// `k!!` with `0!! = 1`, refusing `k > 33`.
pub fn double_factorial(k: u32) -> Result<u64> {
    if k > MAX_DOUBLE_FACTORIAL {
        return Err(Error::limit(format!("{k}!! overflows 64 bits")));
    }
    Ok((1..=k as u64).rev().step_by(2).product())
}

/// `(2m-1)!!`, the number of perfect matchings of `2m` points (1 when `m = 0`).
pub fn matching_count(m: usize) -> Result<u64> {
    if m == 0 {
        return Ok(1);
    }
    double_factorial(2 * m as u32 - 1)
}

fn check_pmp_guard(m: usize) -> Result<()> {
    if m > MAX_PMP_HALF {
        return Err(Error::limit(format!(
            "enumerating perfect matchings of {} points is refused (limit m <= {MAX_PMP_HALF})",
            2 * m
        )));
    }
    Ok(())
}

/// Calls `visit` once per perfect matching of `0..2m`, in canonical order:
/// the lowest free index is paired with each higher free index in turn.
fn for_each_matching(m: usize, mut visit: impl FnMut(&[(usize, usize)])) {
    fn rec(free: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, visit: &mut dyn FnMut(&[(usize, usize)])) {
        if free.is_empty() {
            visit(pairs);
            return;
        }
        let low = free.remove(0);
        for pos in 0..free.len() {
            let partner = free.remove(pos);
            pairs.push((low, partner));
            rec(free, pairs, visit);
            pairs.pop();
            free.insert(pos, partner);
        }
        free.insert(0, low);
    }
    let mut free: Vec<usize> = (0..2 * m).collect();
    let mut pairs = Vec::with_capacity(m);
    rec(&mut free, &mut pairs, &mut visit);
}

/// All `(2m-1)!!` perfect matchings of `0..2m`, canonical order.
pub fn enumerate_pmp(m: usize) -> Result<Vec<PerfectMatching>> {
    check_pmp_guard(m)?;
    let mut out = Vec::with_capacity(matching_count(m)? as usize);
    for_each_matching(m, |p| out.push(PerfectMatching { pairs: p.to_vec() }));
    Ok(out)
}

/// Hafnian by direct summation over every perfect matching.
///
/// This is the reference evaluator; it is slow and limited to `dim <= 18`.
pub fn hafnian_definition(x: &ComplexMatrix) -> Result<Complex64> {
    let dim = x.dim();
    if dim % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_pmp_guard(dim / 2)?;
    let mut total = Complex64::new(0.0, 0.0);
    for_each_matching(dim / 2, |pairs| {
        total += pairs
            .iter()
            .map(|&(a, b)| x.get(a, b))
            .fold(Complex64::new(1.0, 0.0), |acc, z| acc * z);
    });
    Ok(total)
}

/// Hafnian by first-row expansion,
/// `Haf(X) = Σ_{j>0} X[0][j] · Haf(X without rows/columns 0 and j)`.
///
/// Sub-Hafnians are memoized by their remaining index set once the matrix is
/// large enough for repeats to matter. Accepts `dim <= 24`.
pub fn hafnian(x: &ComplexMatrix) -> Result<Complex64> {
    let dim = x.dim();
    if dim > MAX_HAFNIAN_DIM {
        return Err(Error::limit(format!(
            "hafnian of a {dim}x{dim} matrix is refused (limit {MAX_HAFNIAN_DIM})"
        )));
    }
    if dim % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let full: u32 = (1u32 << dim) - 1;
    if dim <= 10 {
        Ok(expand(x, full))
    } else {
        let mut memo = HashMap::new();
        Ok(expand_memo(x, full, &mut memo))
    }
}

fn expand(x: &ComplexMatrix, mask: u32) -> Complex64 {
    if mask == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let low = mask.trailing_zeros() as usize;
    let rest = mask & (mask - 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut others = rest;
    while others != 0 {
        let j = others.trailing_zeros() as usize;
        others &= others - 1;
        let a = x.get(low, j);
        if a != Complex64::new(0.0, 0.0) {
            acc += a * expand(x, rest & !(1 << j));
        }
    }
    acc
}

fn expand_memo(x: &ComplexMatrix, mask: u32, memo: &mut HashMap<u32, Complex64>) -> Complex64 {
    if mask.count_ones() <= 6 {
        return expand(x, mask);
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let low = mask.trailing_zeros() as usize;
    let rest = mask & (mask - 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut others = rest;
    while others != 0 {
        let j = others.trailing_zeros() as usize;
        others &= others - 1;
        let a = x.get(low, j);
        if a != Complex64::new(0.0, 0.0) {
            acc += a * expand_memo(x, rest & !(1 << j), memo);
        }
    }
    memo.insert(mask, acc);
    acc
}

/// Monte-Carlo estimates of `E|Haf(X)|²` and `E|Haf(X)|⁴` over symmetric
/// standard complex Gaussian matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub trials: usize,
    pub mean2: f64,
    pub stderr2: f64,
    pub mean4: f64,
    pub stderr4: f64,
}

const MC_CHUNK: usize = 2048;

/// Samples `trials` matrices from `gaussian_symmetric(k, 1)` and averages
/// `|Haf|²` and `|Haf|⁴`. The targets are `(k-1)!!` and `k!`.
///
/// Work is split into fixed-size chunks, each on its own substream, and
/// reduced in chunk order, so the result does not depend on thread count.
pub fn haf_moments_mc(k: usize, trials: usize, rng: &mut RandomStream) -> Result<MomentEstimate> {
    if k % 2 == 1 || !(2..=12).contains(&k) {
        return Err(Error::invalid(format!("haf_moments_mc needs an even k in 2..=12, got {k}")));
    }
    if trials < 100 {
        return Err(Error::invalid(format!("haf_moments_mc needs >= 100 trials, got {trials}")));
    }
    let base = rng.next_u64();
    let chunks = trials.div_ceil(MC_CHUNK);
    let samples: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sub = RandomStream::substream(base, c as u64);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            (0..len)
                .map(|_| {
                    let x = gaussian_symmetric(k, 1.0, &mut sub)?;
                    Ok(hafnian(&x)?.norm_sqr())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let abs2: Vec<f64> = samples.into_iter().flatten().collect();
    let (mean2, stderr2) = mean_and_stderr(abs2.iter().copied());
    let (mean4, stderr4) = mean_and_stderr(abs2.iter().map(|v| v * v));
    Ok(MomentEstimate {
        k,
        trials,
        mean2,
        stderr2,
        mean4,
        stderr4,
    })
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Closed-form `(E|Haf(B_S)|², E|Haf(B_S)|⁴)` for `k x k` submatrices of a
/// COE matrix approximated as symmetric Gaussian with `E|z|² = tanh²r / n`:
/// `(tanh^k r / n^{k/2} · (k-1)!!, tanh^{2k} r / n^k · k!)`.
pub fn scaled_haf_moments(k: usize, n: usize, r: f64) -> Result<(f64, f64)> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::invalid(format!("scaled_haf_moments needs an even k >= 2, got {k}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let t = r.tanh();
    let dfact: f64 = (1..k).step_by(2).map(|v| v as f64).product();
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    let scale = t.powi(k as i32) / (n as f64).powf(k as f64 / 2.0);
    Ok((scale * dfact, scale * scale * fact))
}

/// Cycle structure of the graph `G_ξ(m)`: the identity matching's edges
/// `(2j, 2j+1)` overlaid with the edges of `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCount {
    /// Components where the identity edge and the `ξ` edge coincide.
    pub one_cycles: usize,
    /// Components spanning two or more identity edges.
    pub long_cycles: usize,
}

impl CycleCount {
    pub fn total(&self) -> usize {
        self.one_cycles + self.long_cycles
    }

    /// `N(σ₀, ξ) = 2^(long cycles)`: the number of ordered pairs of matchings
    /// whose edge multiset equals that of `σ₀ ∪ ξ`.
    pub fn n_value(&self) -> u64 {
        1 << self.long_cycles
    }
}

pub fn matching_cycles(xi: &PerfectMatching) -> CycleCount {
    let size = 2 * xi.half_size();
    let mut partner = vec![0usize; size];
    for &(a, b) in xi.pairs() {
        partner[a] = b;
        partner[b] = a;
    }
    let mut visited = vec![false; size];
    let mut count = CycleCount {
        one_cycles: 0,
        long_cycles: 0,
    };
    for start in (0..size).step_by(2) {
        if visited[start] {
            continue;
        }
        // walk alternating identity / ξ edges until we return
        let mut node = start;
        let mut identity_edges = 0;
        loop {
            visited[node] = true;
            let twin = node ^ 1;
            visited[twin] = true;
            identity_edges += 1;
            node = partner[twin];
            if node == start {
                break;
            }
        }
        if identity_edges == 1 {
            count.one_cycles += 1;
        } else {
            count.long_cycles += 1;
        }
    }
    count
}

/// Every matching of `0..2m` with its `G_ξ(m)` cycle structure.
pub fn cycle_census(m: usize) -> Result<Vec<(PerfectMatching, CycleCount)>> {
    if m == 0 || m > MAX_CYCLE_HALF {
        return Err(Error::limit(format!("cycle census needs 1 <= m <= {MAX_CYCLE_HALF}, got {m}")));
    }
    Ok(enumerate_pmp(m)?
        .into_iter()
        .map(|xi| {
            let c = matching_cycles(&xi);
            (xi, c)
        })
        .collect())
}

/// `f(m) = Σ_ξ 2^{cyc(ξ)}` over all matchings `ξ` of `0..2m`; equals `(2m)!!`.
pub fn pmp_cycle_sum(m: usize) -> Result<u64> {
    Ok(cycle_census(m)?.iter().map(|(_, c)| 1u64 << c.total()).sum())
}
