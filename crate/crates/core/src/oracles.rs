//! Exact, simulation-free checks of the combinatorial facts behind the
//! median bounds:
//!
//! * an anticoncentration inequality for sums of independent Bernoulli
//!   variables with parameters in [1/4, 3/4], checked against the exact
//!   Poisson-binomial distribution;
//! * the counting characterisation of the upper median;
//! * the range of Gaussian exceedance probabilities below 0.63·σ₁.

use crate::error::{Error, Result};
use crate::estimators::empirical_median;
use crate::special::{normal_cdf, normal_sf};
use crate::stats::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Threshold coefficient of the anticoncentration inequality as stated.
pub const LEMMA1_STATED_CONSTANT: f64 = 0.3;

/// The coefficient its derivation actually produces, 1 − 1/√2.
pub fn lemma1_derived_constant() -> f64 {
    1.0 - FRAC_1_SQRT_2
}

/// Slack allowed when comparing an exact tail with δ/2.
pub const ARITHMETIC_SLACK: f64 = 1e-12;

/// Exact distribution of S = Σ Vᵢ with independent Vᵢ ~ Bernoulli(pᵢ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactTail {
    /// pmf[k] = P(S = k), k = 0..=n
    pub pmf: Vec<f64>,
    /// E[S] = Σ pᵢ
    pub mean: f64,
}

impl ExactTail {
    pub fn n(&self) -> usize {
        self.pmf.len() - 1
    }

    /// P(S ≥ k).
    pub fn upper_tail(&self, k: usize) -> f64 {
        if k > self.n() {
            return 0.0;
        }
        // smallest terms first
        let mut acc = CompensatedSum::new();
        for &p in self.pmf[k..].iter().rev() {
            acc.add(p);
        }
        acc.total()
    }

    /// P(S ≥ x) for a real threshold: S ≥ ⌈x⌉ since S is integer-valued.
    pub fn tail_at_least(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let k = x.ceil();
        if k > self.n() as f64 {
            0.0
        } else {
            self.upper_tail(k as usize)
        }
    }
}

/// Poisson-binomial pmf by the convolution recurrence, one variable at a time.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Result<ExactTail> {
    if probs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::OutOfRange {
            name: "probability",
            value: p,
            expected: "0 <= p <= 1",
        });
    }
    let n = probs.len();
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for (m, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        // after this step pmf[0..=m+1] holds the distribution of the first m+1 variables
        pmf[m + 1] = pmf[m] * p;
        for k in (1..=m).rev() {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[0] *= q;
    }
    let mean = probs.iter().copied().collect::<CompensatedSum>().total();
    Ok(ExactTail { pmf, mean })
}

/// Exact tail against δ/2 for one threshold coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    pub coefficient: f64,
    /// E[S] + coefficient·√(n log(2/δ))
    pub threshold: f64,
    /// Smallest integer value of S counted in the tail.
    pub cutoff: usize,
    pub tail: f64,
    /// δ/2
    pub target: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Result of checking the anticoncentration inequality on one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Outcome {
    pub n: usize,
    pub delta: f64,
    pub mean: f64,
    /// With the stated constant 0.3.
    pub stated: TailComparison,
    /// With the derived constant 1 − 1/√2.
    pub derived: TailComparison,
}

/// Checks P(S ≥ E[S] + 0.3·√(n log(2/δ))) ≥ δ/2 exactly, together with the
/// variant using 1 − 1/√2 in place of 0.3.
///
/// Requires every pᵢ ∈ [1/4, 3/4] and δ ∈ (exp(−n), 1).
pub fn lemma1_exact_check(probs: &[f64], delta: f64) -> Result<Lemma1Outcome> {
    if let Some(&p) = probs.iter().find(|p| !(0.25..=0.75).contains(*p)) {
        return Err(Error::OutOfRange {
            name: "probability",
            value: p,
            expected: "1/4 <= p <= 3/4",
        });
    }
    let exact = poisson_binomial_pmf(probs)?;
    let n = probs.len();
    let floor = (-(n as f64)).exp();
    if !(delta > floor && delta < 1.0) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            expected: "exp(-n) < delta < 1",
        });
    }
    let spread = (n as f64 * (2.0 / delta).ln()).sqrt();
    let compare = |coefficient: f64| {
        let threshold = exact.mean + coefficient * spread;
        let tail = exact.tail_at_least(threshold);
        let target = 0.5 * delta;
        TailComparison {
            coefficient,
            threshold,
            cutoff: threshold.max(0.0).ceil() as usize,
            tail,
            target,
            margin: tail - target,
            holds: tail >= target - ARITHMETIC_SLACK,
        }
    };
    Ok(Lemma1Outcome {
        n,
        delta,
        mean: exact.mean,
        stated: compare(LEMMA1_STATED_CONSTANT),
        derived: compare(lemma1_derived_constant()),
    })
}

/// Both sides of the counting characterisation of the median at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Outcome {
    pub t: f64,
    /// median(values) ≥ t
    pub estimator_side: bool,
    /// D(t) ≥ B(t), evaluated as #{Xᵢ ≥ t} ≥ n/2
    pub counting_side: bool,
    pub agree: bool,
    pub count: usize,
    /// D(t) = Σ (1{Xᵢ ≥ t} − P(Xᵢ > t))
    pub d_value: f64,
    /// B(t) = Σ P(0 ≤ Xᵢ ≤ t)
    pub b_value: f64,
    /// (D − B) − (count − n/2); zero up to rounding by symmetry.
    pub identity_residual: f64,
}

/// Evaluates median(values) ≥ t and D(t) ≥ B(t) for centred Gaussian
/// observations with the given scales.
///
/// The verdict on the counting side uses the exact integer form
/// `2·#{Xᵢ ≥ t} ≥ n`, to which D(t) ≥ B(t) reduces because
/// P(Xᵢ > t) + P(0 ≤ Xᵢ ≤ t) = 1/2; the floating D and B are returned
/// alongside together with the residual of that identity.
pub fn lemma2_equivalence_check(values: &[f64], scales: &[f64], t: f64) -> Result<Lemma2Outcome> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: "t >= 0",
        });
    }
    let median = empirical_median(values)?;
    if scales.len() != values.len() {
        return Err(Error::LengthMismatch {
            values: values.len(),
            scales: scales.len(),
        });
    }
    if let Some((index, &value)) = scales
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(Error::InvalidScale { index, value });
    }

    let n = values.len();
    let count = values.iter().filter(|&&x| x >= t).count();
    let mut d = CompensatedSum::new();
    let mut b = CompensatedSum::new();
    for (&x, &s) in values.iter().zip(scales) {
        let exceed = normal_sf(t / s);
        d.add(if x >= t { 1.0 } else { 0.0 } - exceed);
        b.add(normal_cdf(t / s) - 0.5);
    }
    let (d_value, b_value) = (d.total(), b.total());
    let estimator_side = median >= t;
    let counting_side = 2 * count >= n;
    Ok(Lemma2Outcome {
        t,
        estimator_side,
        counting_side,
        agree: estimator_side == counting_side,
        count,
        d_value,
        b_value,
        identity_residual: (d_value - b_value) - (count as f64 - 0.5 * n as f64),
    })
}

/// √(2π)/4 ≈ 0.6267: below t = this·σ₁ every Gaussian exceedance
/// probability stays in [1/4, 3/4].
pub fn corollary2_safe_factor() -> f64 {
    (2.0 * PI).sqrt() / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corollary2Outcome {
    pub t: f64,
    pub min_p: f64,
    pub max_p: f64,
    /// Every pᵢ(t) = P(Xᵢ ≥ t) lies in [1/4, 3/4].
    pub holds: bool,
}

/// Range of pᵢ(t) = 1 − Φ(t/σᵢ) over the scales.
pub fn corollary2_range_check(scales: &[f64], t: f64) -> Result<Corollary2Outcome> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: "t >= 0",
        });
    }
    if scales.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, &value)) = scales
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(Error::InvalidScale { index, value });
    }
    let (mut min_p, mut max_p) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in scales {
        let p = normal_sf(t / s);
        min_p = min_p.min(p);
        max_p = max_p.max(p);
    }
    Ok(Corollary2Outcome {
        t,
        min_p,
        max_p,
        holds: min_p >= 0.25 && max_p <= 0.75,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // references carry all mpmath digits
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Binomial pmf C(n,k) pᵏ (1−p)ⁿ⁻ᵏ through log-gamma-free products.
    fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
        (0..=n)
            .map(|k| {
                let ln_choose: f64 = (1..=k).map(|r| ((n - k + r) as f64 / r as f64).ln()).sum();
                (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
            })
            .collect()
    }

    /// C(20, k) / 2^20 in exact integers.
    fn fair_coins_20() -> Vec<f64> {
        let mut row = vec![1u64];
        for _ in 0..20 {
            let mut next = vec![1u64; row.len() + 1];
            for k in 1..row.len() {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
        }
        row.into_iter()
            .map(|c| c as f64 / (1u64 << 20) as f64)
            .collect()
    }

    #[test]
    fn pmf_small_examples() {
        let e = poisson_binomial_pmf(&[0.5, 0.5]).unwrap();
        assert_eq!(e.pmf, vec![0.25, 0.5, 0.25]);
        assert_eq!(e.mean, 1.0);
        let e = poisson_binomial_pmf(&[0.3]).unwrap();
        assert_eq!(e.pmf, vec![0.7, 0.3]);
    }

    #[test]
    fn pmf_matches_integer_binomial() {
        let e = poisson_binomial_pmf(&[0.5; 20]).unwrap();
        for (got, want) in e.pmf.iter().zip(fair_coins_20()) {
            assert!((got - want).abs() < 1e-15);
        }
        // 40-digit reference for P(S >= 12)
        assert!((e.upper_tail(12) - 0.25172233581543).abs() < 1e-12);
    }

    #[test]
    fn pmf_rejects_bad_probabilities() {
        assert!(poisson_binomial_pmf(&[]).is_err());
        assert!(poisson_binomial_pmf(&[0.5, 1.2]).is_err());
        assert!(poisson_binomial_pmf(&[-0.1]).is_err());
        assert!(poisson_binomial_pmf(&[f64::NAN]).is_err());
    }

    #[test]
    fn large_pmf_is_normalised() {
        let probs: Vec<f64> = (0..10_000)
            .map(|i| 0.05 + 0.9 * ((i * 37) % 101) as f64 / 100.0)
            .collect();
        let e = poisson_binomial_pmf(&probs).unwrap();
        let total: f64 = e.pmf.iter().copied().collect::<CompensatedSum>().total();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(e.pmf.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let mean: f64 = e
            .pmf
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .collect::<CompensatedSum>()
            .total();
        assert!((mean - e.mean).abs() < 1e-10 * e.mean);
    }

    #[test]
    fn lemma1_examples() {
        let r = lemma1_exact_check(&[0.5; 20], 0.25).unwrap();
        assert!((r.stated.threshold - 11.93468209).abs() < 1e-8);
        assert_eq!(r.stated.cutoff, 12);
        assert!((r.stated.tail - 0.25172233581543).abs() < 1e-12);
        assert!(r.stated.holds);

        let r = lemma1_exact_check(&[0.5; 40], 0.25).unwrap();
        assert!((r.stated.threshold - 22.73605365).abs() < 1e-8);
        assert!((r.stated.tail - 0.214795253921693).abs() < 1e-12);
        assert!(r.stated.holds);

        // the stated constant is too strong for δ near 1/2
        let r = lemma1_exact_check(&[0.5; 40], 0.5).unwrap();
        assert!((r.stated.threshold - 22.23397845).abs() < 1e-8);
        assert!((r.stated.tail - 0.214795253921693).abs() < 1e-12);
        assert!(!r.stated.holds);
        assert!(!r.derived.holds);

        // n = 200, δ = 0.05: the two constants select different cutoffs
        let r = lemma1_exact_check(&[0.5; 200], 0.05).unwrap();
        assert_eq!((r.stated.cutoff, r.derived.cutoff), (109, 108));
        assert!((r.stated.tail - 0.114623298629858).abs() < 1e-12);
        assert!((r.derived.tail - 0.144410248587383).abs() < 1e-12);
    }

    #[test]
    fn lemma1_domain() {
        assert!(lemma1_exact_check(&[0.2, 0.5], 0.1).is_err());
        assert!(lemma1_exact_check(&[0.5; 3], (-3.0f64).exp() * 0.5).is_err());
        assert!(lemma1_exact_check(&[0.5; 3], 1.0).is_err());
        assert!((lemma1_derived_constant() - 0.2928932188134525).abs() < 1e-15);
    }

    #[test]
    fn integer_threshold_is_inclusive() {
        let e = poisson_binomial_pmf(&[0.5; 4]).unwrap();
        assert_eq!(e.tail_at_least(2.0), e.upper_tail(2));
        assert_eq!(e.tail_at_least(2.0000001), e.upper_tail(3));
        assert_eq!(e.tail_at_least(5.0), 0.0);
        assert_eq!(e.tail_at_least(-1.0), 1.0);
    }

    #[test]
    fn lemma2_examples() {
        let r = lemma2_equivalence_check(&[1.0, 2.0, 3.0], &[0.5, 1.0, 9.0], 2.0).unwrap();
        assert!(r.estimator_side && r.counting_side && r.agree);
        let r = lemma2_equivalence_check(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4], 3.5).unwrap();
        assert!(!r.estimator_side && !r.counting_side && r.agree);
        assert_eq!(r.count, 1);
        assert!(r.identity_residual.abs() < 1e-12);
        assert!(lemma2_equivalence_check(&[1.0], &[1.0], -0.1).is_err());
        assert!(lemma2_equivalence_check(&[1.0], &[1.0, 2.0], 0.1).is_err());
        assert!(lemma2_equivalence_check(&[], &[], 0.1).is_err());
    }

    #[test]
    fn corollary2_examples() {
        let r = corollary2_range_check(&[1.0, 2.0, 5.0], 0.0).unwrap();
        assert_eq!((r.min_p, r.max_p), (0.5, 0.5));
        assert!(r.holds);
        let r = corollary2_range_check(&[1.0, 2.0, 5.0], 0.6266).unwrap();
        assert!((r.min_p - 0.265460734164163571).abs() < 1e-10);
        assert!(r.holds);
        let r = corollary2_range_check(&[1.0], 1.0).unwrap();
        assert!((r.min_p - 0.158655253931457051).abs() < 1e-10);
        assert!(!r.holds);
        assert!(corollary2_range_check(&[1.0], -1.0).is_err());
        assert!((corollary2_safe_factor() - 0.62665706865775012560).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pmf_agrees_with_binomial(n in 1usize..=200, p in 0.0f64..=1.0) {
            let e = poisson_binomial_pmf(&vec![p; n]).unwrap();
            for (got, want) in e.pmf.iter().zip(binomial_pmf(n, p)) {
                prop_assert!((got - want).abs() <= 1e-10);
            }
        }

        #[test]
        fn pmf_permutation_invariant(probs in prop::collection::vec(0.0f64..=1.0, 1..80)) {
            let a = poisson_binomial_pmf(&probs).unwrap();
            let mut rev = probs.clone();
            rev.reverse();
            let b = poisson_binomial_pmf(&rev).unwrap();
            for (x, y) in a.pmf.iter().zip(&b.pmf) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }

        #[test]
        fn lemma1_holds_in_small_delta_regime(
            probs in prop::collection::vec(0.25f64..=0.75, 20..120),
            delta in 0.01f64..=0.25,
        ) {
            let r = lemma1_exact_check(&probs, delta).unwrap();
            prop_assert!(r.stated.holds, "{:?}", r);
        }

        #[test]
        fn corollary2_safe_region(scales in prop::collection::vec(0.01f64..100.0, 1..40), frac in 0.0f64..=1.0) {
            let s1 = scales.iter().copied().fold(f64::INFINITY, f64::min);
            let r = corollary2_range_check(&scales, frac * corollary2_safe_factor() * s1).unwrap();
            prop_assert!(r.min_p >= 0.25 - 1e-9);
            prop_assert!(r.max_p <= 0.5);
        }
    }
}
