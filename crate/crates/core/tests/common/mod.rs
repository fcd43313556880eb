#![allow(dead_code)]

use std::path::PathBuf;

use maxhaf::linalg::{coe_matrix, complex_normal, ComplexMatrix, SqueezingSpec};
use maxhaf::RandomStream;
use num_complex::Complex64;

/// tanh(r) = 1/2, the squeezing used for the archived instances.
pub const R_HALF: f64 = 0.5493061443340548;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn archived_instance(i: usize) -> ComplexMatrix {
    ComplexMatrix::load(data_dir().join(format!("instances/coe_n12_{i}.json"))).unwrap()
}

pub fn coe(n: usize, seed: u64) -> ComplexMatrix {
    coe_matrix(SqueezingSpec::new(R_HALF, n).unwrap(), &mut RandomStream::new(seed)).unwrap()
}

pub fn random_symmetric(dim: usize, rng: &mut RandomStream) -> ComplexMatrix {
    let mut upper = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            upper[i * dim + j] = complex_normal(rng, 1.0);
        }
    }
    ComplexMatrix::symmetric_from_upper(dim, upper).unwrap()
}

/// Kolmogorov–Smirnov statistic of `samples` against a continuous CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.001.
pub fn ks_critical(n: usize) -> f64 {
    1.9495 / (n as f64).sqrt()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Permanent by Ryser's formula, an independent route to bipartite Hafnians.
pub fn permanent(c: &[Vec<Complex64>]) -> Complex64 {
    let n = c.len();
    let mut total = Complex64::new(0.0, 0.0);
    for subset in 1u32..(1 << n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for row in c {
            let s: Complex64 = (0..n).filter(|j| subset >> j & 1 == 1).map(|j| row[j]).sum();
            prod *= s;
        }
        let sign = if (n as u32 - subset.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
