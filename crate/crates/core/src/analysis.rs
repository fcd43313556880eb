//! Closed-form theory of proportional sampling.
//!
//! For an objective vector `y ≥ 0`, uniform sampling has mean `‖y‖₁/N` while
//! sampling proportionally to `y` has mean `‖y‖₂²/‖y‖₁`; the ratio is at
//! least one. For random search with `κ` draws the module models the
//! normalized rank `Y ∈ (0, 1]` either as uniform or with the exponential
//! density `p(y) = λ e^{λ(y-1)} / (1 - e^{-λ})`, and computes the expected
//! best draw `E(Z)`, `Z = max(Y_1, …, Y_κ)`.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hafnian::mean_and_stderr;
use crate::rng::RandomStream;

/// Objective values `y_1, …, y_N`, all non-negative and not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector {
    values: Vec<f64>,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("objective vector is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("objective value {v} is not finite and non-negative")));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid("all objective values are zero; the proportional law is undefined"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn l1(&self) -> f64 {
        self.values.iter().sum()
    }

    fn l2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// `‖y‖₁ / N`.
pub fn expectation_uniform(y: &ObjectiveVector) -> f64 {
    y.l1() / y.len() as f64
}

/// `‖y‖₂² / ‖y‖₁`.
pub fn expectation_proportional(y: &ObjectiveVector) -> f64 {
    y.l2_sq() / y.l1()
}

/// `(√N ‖y‖₂ / ‖y‖₁)²`, the gain of proportional over uniform sampling.
pub fn advantage_ratio(y: &ObjectiveVector) -> f64 {
    y.len() as f64 * y.l2_sq() / (y.l1() * y.l1())
}

/// `κ / (κ + 1)`: mean of the best of `κ` uniform draws on `(0, 1]`.
pub fn expected_max_uniform(kappa: u32) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::invalid("kappa must be >= 1"));
    }
    Ok(kappa as f64 / (kappa as f64 + 1.0))
}

/// Rate `λ` of the exponential rank density and the draw budget `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFamilyParams {
    pub lambda: f64,
    pub kappa: u32,
}

impl ExpFamilyParams {
    pub fn new(lambda: f64, kappa: u32) -> Result<Self> {
        let p = Self { lambda, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.kappa == 0 {
            return Err(Error::invalid("kappa must be >= 1"));
        }
        Ok(())
    }
}

/// Above this rate `e^λ` leaves the double range.
const MAX_LAMBDA: f64 = 700.0;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || lambda.is_nan() {
        return Err(Error::invalid(format!("lambda = {lambda} must be positive")));
    }
    if lambda > MAX_LAMBDA {
        return Err(Error::limit(format!("lambda = {lambda} overflows e^lambda (limit {MAX_LAMBDA})")));
    }
    Ok(())
}

fn check_unit(y: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!("y = {y} outside [0, 1]")));
    }
    Ok(())
}

/// `p(y) = λ e^{λ(y-1)} / (1 - e^{-λ})`.
pub fn exp_density(lambda: f64, y: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_unit(y)?;
    Ok(lambda * (lambda * (y - 1.0)).exp() / -(-lambda).exp_m1())
}

/// `P(Y ≤ y) = (e^{λy} - 1) / (e^λ - 1)`.
pub fn exp_cdf(lambda: f64, y: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_unit(y)?;
    Ok((lambda * y).exp_m1() / lambda.exp_m1())
}

/// Inverse of [`exp_cdf`]: `y = ln(1 + u (e^λ - 1)) / λ`, which is
/// `1 + ln(u (1 - e^{-λ}) + e^{-λ}) / λ` rearranged to keep precision at small `λ`.
pub fn exp_inverse_cdf(lambda: f64, u: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_unit(u)?;
    Ok((u * lambda.exp_m1()).ln_1p() / lambda)
}

/// `H_κ = Σ_{n=1}^{κ} 1/n`.
pub fn harmonic_number(kappa: u32) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::invalid("kappa must be >= 1"));
    }
    // smallest terms first
    Ok((1..=kappa).rev().map(|n| 1.0 / n as f64).sum())
}

/// `₃F₂(1, 1, 1-κ; 2, 2; z)`, which terminates after `κ` terms because the
/// third upper parameter is a non-positive integer.
///
/// Term ratio: `t_{n+1} / t_n = (n+1)(n+1-κ) z / (n+2)²`.
pub fn hyp3f2_terminating(kappa: u32, z: f64) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::invalid("kappa must be >= 1"));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..kappa as i64 - 1 {
        let nf = n as f64;
        term *= (nf + 1.0) * (nf + 1.0 - kappa as f64) * z / ((nf + 2.0) * (nf + 2.0));
        sum += term;
    }
    Ok(sum)
}

/// Literal closed form of `E(Z)` under the exponential density,
/// `(1/λ)(1-e^λ)^{-κ} [((1-e^λ)^κ - 1)λ - H_κ + κ e^λ ₃F₂(1,1,1-κ;2,2;e^λ)]`.
///
/// The alternating hypergeometric sum cancels catastrophically once `κ` grows
/// (at `λ = 1` roughly a digit is lost per three terms), so this is only a
/// cross-check for small `κ`; use [`expected_max_proportional`].
pub fn expected_max_proportional_closed_form(params: ExpFamilyParams) -> Result<f64> {
    params.validate()?;
    let (lambda, kappa) = (params.lambda, params.kappa);
    let z = lambda.exp();
    let w = -lambda.exp_m1();
    let wk = w.powi(kappa as i32);
    let bracket = (wk - 1.0) * lambda - harmonic_number(kappa)? + kappa as f64 * z * hyp3f2_terminating(kappa, z)?;
    Ok(bracket / (lambda * wk))
}

/// `1 - E(Z)` under the exponential density, evaluated without cancellation.
///
/// With `D = e^λ - 1`, `1 - E(Z) = T / λ` where
/// `T = ∫_0^D t^κ / (1 + t) dt / D^κ`. For `D ≥ 1` the finite expansion
/// `T = Σ_{i<κ} (-1/D)^i / (κ - i) + λ (-1/D)^κ` has geometrically shrinking
/// terms; for `D < 1` the series `T = Σ_{i≥0} (-1)^i D^{i+1} / (κ + 1 + i)`
/// does. This is the closed form above with `κ e^λ ₃F₂ = H_κ - Σ_{j≤κ} (1-e^λ)^j / j`.
pub fn shortfall_proportional(params: ExpFamilyParams) -> Result<f64> {
    params.validate()?;
    let (lambda, kappa) = (params.lambda, params.kappa as f64);
    let d = lambda.exp_m1();
    let t = if d >= 1.0 {
        let ratio = -1.0 / d;
        let mut power = 1.0;
        let mut sum = 0.0;
        for i in 0..params.kappa {
            sum += power / (kappa - i as f64);
            power *= ratio;
        }
        sum + lambda * power
    } else {
        let mut power = d;
        let mut sum = 0.0;
        let mut i = 0u32;
        loop {
            let term = power / (kappa + 1.0 + i as f64);
            sum += if i % 2 == 0 { term } else { -term };
            if term < 1e-18 * sum.abs() || i > 1_000_000 {
                break;
            }
            power *= d;
            i += 1;
        }
        sum
    };
    Ok(t / lambda)
}

/// `E(Z)` for the best of `κ` draws from the exponential rank density.
pub fn expected_max_proportional(params: ExpFamilyParams) -> Result<f64> {
    Ok(1.0 - shortfall_proportional(params)?)
}

/// `α = -log₁₀(1 - E)`: how many nines the expected best draw reaches.
pub fn alpha_coefficient(e_max: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e_max) {
        return Err(Error::invalid(format!("e_max = {e_max} outside [0, 1)")));
    }
    Ok(-(1.0 - e_max).log10())
}

/// `ln C(a, b)` for real `a` and integer `b` via `Π_{i=1}^{b} (a - b + i) / i`.
fn ln_binomial(a: f64, b: usize) -> f64 {
    (1..=b).map(|i| ((a - b as f64 + i as f64) / i as f64).ln()).sum()
}

/// GBS-over-uniform gain for `k x k` submatrices of an `n x n` COE matrix,
/// `R = C(n, k) k!! / (C((n+k)/2 - 1, k/2) n^{k/2})`, evaluated in log space.
pub fn analytic_ratio_r(n: usize, k: usize) -> Result<f64> {
    if k < 2 || k % 2 == 1 || k > n {
        return Err(Error::invalid(format!("analytic ratio needs an even k with 2 <= k <= n (n = {n}, k = {k})")));
    }
    let half = k / 2;
    // k!! = 2^{k/2} (k/2)!
    let ln_dfact = half as f64 * std::f64::consts::LN_2 + (1..=half).map(|i| (i as f64).ln()).sum::<f64>();
    let ln_r = ln_binomial(n as f64, k) + ln_dfact
        - ln_binomial((n + k) as f64 / 2.0 - 1.0, half)
        - half as f64 * (n as f64).ln();
    Ok(ln_r.exp())
}

/// Monte-Carlo estimate of `E(Z)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

const MC_CHUNK: usize = 8192;

/// Averages `max(Y_1, …, Y_κ)` over `trials` repetitions with `Y` uniform on
/// `(0, 1]` or, when `proportional`, drawn from the exponential density by
/// inverse CDF.
pub fn mc_expected_max(
    params: ExpFamilyParams,
    proportional: bool,
    trials: usize,
    rng: &mut RandomStream,
) -> Result<McEstimate> {
    params.validate()?;
    if trials < 1000 {
        return Err(Error::invalid(format!("mc_expected_max needs >= 1000 trials, got {trials}")));
    }
    let base = rng.next_u64();
    let chunks = trials.div_ceil(MC_CHUNK);
    let scale = params.lambda.exp_m1();
    let maxima: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut sub = RandomStream::substream(base, c as u64);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            (0..len)
                .map(|_| {
                    (0..params.kappa)
                        .map(|_| {
                            let u = 1.0 - sub.random::<f64>();
                            if proportional {
                                (u * scale).ln_1p() / params.lambda
                            } else {
                                u
                            }
                        })
                        .fold(0.0, f64::max)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let (mean, stderr) = mean_and_stderr(maxima.iter().copied());
    Ok(McEstimate { mean, stderr, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expectations() {
        assert_eq!(expectation_uniform(&ov(&[1.0, 1.0, 1.0])), 1.0);
        assert_eq!(expectation_uniform(&ov(&[0.0, 0.0, 0.0, 1.0])), 0.25);
        assert_eq!(expectation_uniform(&ov(&[1.0, 2.0, 3.0])), 2.0);
        assert_eq!(expectation_proportional(&ov(&[1.0, 1.0, 1.0])), 1.0);
        assert_eq!(expectation_proportional(&ov(&[0.0; 9].iter().copied().chain([1.0]).collect::<Vec<_>>())), 1.0);
        assert!((expectation_proportional(&ov(&[1.0, 2.0, 3.0])) - 14.0 / 6.0).abs() < 1e-15);
        assert_eq!(advantage_ratio(&ov(&[5.0, 5.0])), 1.0);
        assert_eq!(advantage_ratio(&ov(&[0.0, 0.0, 0.0, 1.0])), 4.0);
        assert!((advantage_ratio(&ov(&[1.0, 2.0, 3.0])) - 7.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn objective_vector_validation() {
        assert!(ObjectiveVector::new(vec![]).is_err());
        assert!(ObjectiveVector::new(vec![0.0, 0.0]).is_err());
        assert!(ObjectiveVector::new(vec![1.0, -0.5]).is_err());
        assert!(ObjectiveVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn uniform_best_of_kappa() {
        assert_eq!(expected_max_uniform(1).unwrap(), 0.5);
        assert_eq!(expected_max_uniform(9).unwrap(), 0.9);
        assert_eq!(expected_max_uniform(999).unwrap(), 0.999);
        assert!(expected_max_uniform(0).is_err());
    }

    #[test]
    fn density_values() {
        for lambda in [1.0, 2.0, 4.0, 8.0] {
            let at_one = exp_density(lambda, 1.0).unwrap();
            assert!((at_one - lambda / (1.0 - (-lambda).exp())).abs() < 1e-12);
        }
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            assert!((exp_density(1e-6, y).unwrap() - 1.0).abs() < 1e-5);
        }
        assert!(exp_density(0.0, 0.5).is_err());
        assert!(exp_density(-1.0, 0.5).is_err());
        assert!(exp_density(1.0, 1.5).is_err());
        assert_eq!(exp_density(800.0, 0.5).unwrap_err().kind(), "resource-limit");
    }

    #[test]
    fn inverse_cdf_round_trip() {
        for lambda in [1e-6, 0.5, 1.0, 2.0, 4.0, 8.0, 50.0] {
            for i in 0..1000 {
                let y = (i as f64 + 0.5) / 1000.0;
                let back = exp_inverse_cdf(lambda, exp_cdf(lambda, y).unwrap()).unwrap();
                assert!((back - y).abs() < 1e-12, "lambda={lambda} y={y} back={back}");
            }
        }
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic_number(1).unwrap(), 1.0);
        assert!((harmonic_number(3).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        let direct: f64 = (1..=100).map(|n| 1.0 / n as f64).sum();
        assert!((harmonic_number(100).unwrap() - direct).abs() < 1e-13);
        assert!((harmonic_number(100).unwrap() - 5.187377517639621).abs() < 1e-13);
    }

    #[test]
    fn hypergeometric_terms() {
        assert_eq!(hyp3f2_terminating(1, 123.0).unwrap(), 1.0);
        assert!((hyp3f2_terminating(2, 1.0).unwrap() - 0.75).abs() < 1e-15);
        for kappa in 1..20 {
            assert_eq!(hyp3f2_terminating(kappa, 0.0).unwrap(), 1.0);
        }
        // κ = 3: 1 + (-2/4) z + (1·1·(-2)(-1))/(4·9·2)·2·... computed term by term
        // t1 = (1)(1)(-2) z / (2·2·1) = -z/2, t2 = t1 · (2)(-1) z / 9 = z²/9
        let z = 1.7;
        assert!((hyp3f2_terminating(3, z).unwrap() - (1.0 - z / 2.0 + z * z / 9.0)).abs() < 1e-14);
    }

    #[test]
    fn kappa_one_is_the_density_mean() {
        // E(Y) = e^λ/(e^λ - 1) - 1/λ by integration by parts
        for lambda in [0.1f64, 1.0, 3.0] {
            let exact = lambda.exp() / lambda.exp_m1() - 1.0 / lambda;
            let p = ExpFamilyParams::new(lambda, 1).unwrap();
            assert!((expected_max_proportional(p).unwrap() - exact).abs() < 1e-14);
            assert!((expected_max_proportional_closed_form(p).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_agrees_with_stable_form_for_small_kappa() {
        for lambda in [1.0, 2.0, 4.0, 8.0] {
            for kappa in 1..=8 {
                let p = ExpFamilyParams::new(lambda, kappa).unwrap();
                let a = expected_max_proportional(p).unwrap();
                let b = expected_max_proportional_closed_form(p).unwrap();
                assert!((a - b).abs() < 1e-9, "lambda={lambda} kappa={kappa}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn small_lambda_is_uniform_limit() {
        let p = ExpFamilyParams::new(1e-6, 10).unwrap();
        assert!((expected_max_proportional(p).unwrap() - 10.0 / 11.0).abs() < 1e-4);
    }

    #[test]
    fn dominance_and_monotonicity() {
        for kappa in 1..=100 {
            let uniform = expected_max_uniform(kappa).unwrap();
            let mut prev = uniform;
            for lambda in [1.0, 2.0, 4.0, 8.0] {
                let e = expected_max_proportional(ExpFamilyParams::new(lambda, kappa).unwrap()).unwrap();
                assert!(e > prev, "kappa={kappa} lambda={lambda}");
                prev = e;
            }
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_coefficient(0.0).unwrap(), 0.0);
        assert!((alpha_coefficient(0.9).unwrap() - 1.0).abs() < 1e-12);
        assert!((alpha_coefficient(0.999).unwrap() - 3.0).abs() < 1e-12);
        assert!(alpha_coefficient(1.0).is_err());
        assert!(alpha_coefficient(-0.1).is_err());
    }

    #[test]
    fn ratio_examples() {
        assert!((analytic_ratio_r(4, 2).unwrap() - 1.5).abs() < 1e-14);
        // R(n, 2) = 2(n-1)/n
        let n = 1_000_000;
        assert!((analytic_ratio_r(n, 2).unwrap() - 2.0 * (n as f64 - 1.0) / n as f64).abs() < 1e-9);
        for k in (2..=20).step_by(2) {
            assert!(analytic_ratio_r(k * k, k).unwrap() > 1.0);
        }
        assert!(analytic_ratio_r(4, 3).is_err());
        assert!(analytic_ratio_r(4, 6).is_err());
        assert!(analytic_ratio_r(4, 0).is_err());
    }

    #[test]
    fn mc_argument_checks() {
        let p = ExpFamilyParams::new(1.0, 3).unwrap();
        assert!(mc_expected_max(p, false, 10, &mut RandomStream::new(0)).is_err());
    }

    proptest! {
        #[test]
        fn proportional_never_worse(v in proptest::collection::vec(0.0f64..100.0, 1..50)) {
            prop_assume!(v.iter().any(|&x| x > 0.0));
            let y = ObjectiveVector::new(v).unwrap();
            prop_assert!(expectation_proportional(&y) >= expectation_uniform(&y) * (1.0 - 1e-12));
            prop_assert!(advantage_ratio(&y) >= 1.0 - 1e-12);
        }

        #[test]
        fn alpha_strictly_increasing(a in 0.0f64..0.999, b in 0.0f64..0.999) {
            prop_assume!(a < b);
            prop_assert!(alpha_coefficient(a).unwrap() < alpha_coefficient(b).unwrap());
        }
    }
}
