//! Small numerical building blocks shared by the estimators and the
//! simulation harness: compensated summation, empirical quantiles and the
//! exact (Clopper–Pearson) binomial confidence interval.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().total()
}

/// Nearest-rank empirical quantile of already sorted data: the
/// ⌈q·m⌉-th smallest value (1-based), clamped to the sample.
pub fn nearest_rank_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let m = sorted.len();
    let rank = (q * m as f64).ceil() as usize;
    sorted[rank.clamp(1, m) - 1]
}

/// Two-sided confidence interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionInterval {
    pub low: f64,
    pub high: f64,
}

impl ProportionInterval {
    pub fn contains(&self, p: f64) -> bool {
        self.low <= p && p <= self.high
    }
}

/// Clopper–Pearson interval at confidence `level` for `successes` out of `trials`.
///
/// The limits are the α/2 and 1 − α/2 quantiles of Beta(k, n−k+1) and
/// Beta(k+1, n−k), with the conventional 0 / 1 endpoints at k = 0 / k = n.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> ProportionInterval {
    assert!(trials > 0, "Clopper–Pearson needs at least one trial");
    assert!(successes <= trials);
    assert!(level > 0.0 && level < 1.0);
    let alpha = 1.0 - level;
    let (k, n) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, 0.5 * alpha)
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - 0.5 * alpha)
    };
    ProportionInterval { low, high }
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
///
/// Bisection is slow but monotone and cannot diverge, which matters more
/// here than speed: it is called once per report row.
pub fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
