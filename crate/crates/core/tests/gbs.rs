mod common;

use std::collections::BTreeSet;

use common::{coe, total_variation, R_HALF};
use maxhaf::gbs::{
    gbs_explore, gbs_tweak, q_probability, uniform_explore, uniform_tweak, ConditionalGBSDistribution, Explorer,
    GbsTweaker, TweakParams, Tweaker, UniformExplorer, UniformTweaker,
};
use maxhaf::hafnian::hafnian;
use maxhaf::linalg::{submatrix, ComplexMatrix};
use maxhaf::pattern::{enumerate_patterns, PhotonPattern};
use maxhaf::RandomStream;
use proptest::prelude::*;

fn empirical(dist: &ConditionalGBSDistribution, draws: usize, rng: &mut RandomStream) -> Vec<f64> {
    let mut counts = vec![0usize; dist.len()];
    for _ in 0..draws {
        counts[dist.sample_index(rng)] += 1;
    }
    counts.into_iter().map(|c| c as f64 / draws as f64).collect()
}

#[test]
fn table_matches_direct_hafnians() {
    let b = coe(8, 41);
    let dist = ConditionalGBSDistribution::build(&b, 4, R_HALF).unwrap();
    assert_eq!(dist.len(), 70);
    let total: f64 = dist.probabilities().iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
    for (i, s) in enumerate_patterns(8, 4).unwrap().into_iter().enumerate() {
        assert_eq!(dist.pattern(i), s);
        let w = hafnian(&submatrix(&b, &s).unwrap()).unwrap().norm_sqr();
        assert!((dist.weights()[i] - w).abs() <= 1e-15 * w.max(1e-300));
    }
}

/// Pearson goodness-of-fit p-value of draw counts against `probs`.
fn chi_square_p(counts: &[usize], probs: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let n: usize = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 - n as f64 * p).powi(2) / (n as f64 * p))
        .sum();
    1.0 - ChiSquared::new((probs.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn sampler_total_variation_is_small() {
    // With 70 cells and 10⁵ draws, sampling noise alone puts the TV near
    // 0.009, so the bound is applied to the mean over independent replicates.
    let dist = ConditionalGBSDistribution::build(&coe(8, 42), 4, R_HALF).unwrap();
    let probs = dist.probabilities();
    let mut rng = RandomStream::new(1);
    let tvs: Vec<f64> = (0..10).map(|_| total_variation(&empirical(&dist, 100_000, &mut rng), &probs)).collect();
    let mean = tvs.iter().sum::<f64>() / tvs.len() as f64;
    assert!(mean < 0.01, "{tvs:?}");

    let mut counts = vec![0usize; dist.len()];
    for _ in 0..100_000 {
        counts[dist.sample_index(&mut rng)] += 1;
    }
    assert!(chi_square_p(&counts, &probs) > 1e-3);
}

#[test]
fn uniform_explorer_is_uniform() {
    let pats = enumerate_patterns(7, 2).unwrap();
    let mut counts = vec![0usize; pats.len()];
    let mut rng = RandomStream::new(2);
    for _ in 0..42_000 {
        let s = uniform_explore(7, 2, &mut rng).unwrap();
        counts[pats.binary_search(&s).unwrap()] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / 42_000.0).collect();
    let flat = vec![1.0 / pats.len() as f64; pats.len()];
    assert!(total_variation(&freq, &flat) < 0.02);
}

#[test]
fn explorers_report_their_kind_and_size() {
    let dist = ConditionalGBSDistribution::build(&coe(6, 43), 2, R_HALF).unwrap();
    let uni = UniformExplorer::new(6, 2).unwrap();
    let mut rng = RandomStream::new(3);
    for e in [&dist as &dyn Explorer, &uni] {
        let s = e.explore(&mut rng);
        assert_eq!((s.n(), s.k()), (6, 2));
    }
    assert_eq!(gbs_explore(&dist, &mut rng).k(), 2);
}

#[test]
fn csv_round_trip_preserves_law() {
    let dist = ConditionalGBSDistribution::build(&coe(8, 44), 4, R_HALF).unwrap();
    let mut buf = Vec::new();
    dist.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("pattern,weight,probability\n"));
    assert!(!text.contains('\r'));
    let back = ConditionalGBSDistribution::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.weights(), dist.weights());
    assert_eq!(back.patterns().collect::<Vec<_>>(), dist.patterns().collect::<Vec<_>>());
}

#[test]
fn degenerate_matrix_is_reported() {
    let e = ConditionalGBSDistribution::build(&ComplexMatrix::zeros(6), 2, 0.5).unwrap_err();
    assert_eq!(e.kind(), "degenerate-distribution");
}

#[test]
fn photon_law_is_a_distribution() {
    for (n, r) in [(4, 0.3), (12, R_HALF), (30, 1.0)] {
        let total: f64 = (0..4000).step_by(2).map(|k| q_probability(n, r, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10, "n = {n}, r = {r}: {total}");
    }
}

fn neighbourhood(s: &PhotonPattern, ell: usize) -> BTreeSet<PhotonPattern> {
    enumerate_patterns(s.n(), s.k())
        .unwrap()
        .into_iter()
        .filter(|t| t.overlap(s) >= ell)
        .collect()
}

#[test]
fn tweaks_reach_exactly_the_overlap_neighbourhood() {
    let (n, k, ell) = (8, 4, 2);
    let params = TweakParams::new(ell, k).unwrap();
    let dist_ell = ConditionalGBSDistribution::build(&coe(n, 45), ell, R_HALF).unwrap();
    let s = PhotonPattern::from_indices(n, &[0, 3, 4, 7]).unwrap();
    let target = neighbourhood(&s, ell);
    let mut rng = RandomStream::new(4);
    let mut seen_gbs = BTreeSet::new();
    let mut seen_uniform = BTreeSet::new();
    for _ in 0..40_000 {
        seen_gbs.insert(gbs_tweak(&s, &params, &dist_ell, &mut rng).unwrap());
        seen_uniform.insert(uniform_tweak(&s, &params, &mut rng).unwrap());
    }
    assert_eq!(seen_uniform, target);
    assert_eq!(seen_gbs, target);
}

#[test]
fn tweakers_wrap_the_free_functions() {
    let params = TweakParams::new(6, 10).unwrap();
    let dist_ell = ConditionalGBSDistribution::build(&coe(16, 46), 6, R_HALF).unwrap();
    let gbs = GbsTweaker::new(params, &dist_ell).unwrap();
    let uni = UniformTweaker::new(params).unwrap();
    let mut rng = RandomStream::new(5);
    let s = uniform_explore(16, 10, &mut rng).unwrap();
    for t in [&gbs as &dyn Tweaker, &uni] {
        for _ in 0..200 {
            let r = t.tweak(&s, &mut rng).unwrap();
            assert_eq!(r.k(), 10);
            assert!(r.overlap(&s) >= 6);
        }
    }
    // ℓ-photon table of the wrong size is refused
    let wrong = ConditionalGBSDistribution::build(&coe(16, 46), 4, R_HALF).unwrap();
    assert!(GbsTweaker::new(params, &wrong).is_err());
}

#[test]
fn tweak_parameter_rules() {
    assert!(TweakParams::new(6, 10).is_ok());
    assert!(TweakParams::new(2, 4).is_ok());
    assert!(TweakParams::new(3, 6).is_err());
    assert!(TweakParams::new(2, 6).is_err());
    assert!(TweakParams::new(10, 10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tweak_output_is_valid(seed in any::<u64>(), half_ell in 1usize..4) {
        let ell = 2 * half_ell;
        let k = ell + 2;
        let n = 12;
        let params = TweakParams::new(ell, k).unwrap();
        let dist_ell = ConditionalGBSDistribution::build(&coe(n, seed), ell, R_HALF).unwrap();
        let mut rng = RandomStream::new(seed);
        let s = uniform_explore(n, k, &mut rng).unwrap();
        for _ in 0..20 {
            for r in [gbs_tweak(&s, &params, &dist_ell, &mut rng).unwrap(), uniform_tweak(&s, &params, &mut rng).unwrap()] {
                prop_assert_eq!((r.n(), r.k()), (n, k));
                prop_assert!(r.overlap(&s) >= ell);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let dist = ConditionalGBSDistribution::build(&coe(6, 47), 2, R_HALF).unwrap();
        let a: Vec<usize> = { let mut r = RandomStream::new(seed); (0..50).map(|_| dist.sample_index(&mut r)).collect() };
        let b: Vec<usize> = { let mut r = RandomStream::new(seed); (0..50).map(|_| dist.sample_index(&mut r)).collect() };
        prop_assert_eq!(a, b);
    }
}
