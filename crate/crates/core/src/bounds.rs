//! Closed-form deviation bounds for the mean, the oracle MLE and the
//! empirical median under heteroscedastic scales, plus the comparison
//! inequality between the median's upper bound and the mean's deviation.
//!
//! All bounds are half-widths of a deviation interval around the true
//! location, evaluated from the ascending scale profile σ₁ ≤ … ≤ σₙ and a
//! confidence parameter δ. Logarithms are natural.
//!
//! The median bounds all share the trimmed harmonic sum
//! `Σ_{i=j+1}^{n} 1/σᵢ`, which discards the `j` smallest scales; `j` grows
//! like `√(n log(1/δ))`, so the most precise observations do not enter.
//!
//! Values that fall outside a bound's admissible δ-range come back as
//! reports with `applicable == false` rather than as errors, because the
//! simulation harness sweeps δ across those boundaries. Genuinely invalid
//! arguments (δ ∉ (0,1), a constant outside its range) are errors.

use crate::error::{check_delta, Error, Result};
use crate::stats::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;

/// Ascending, strictly positive scale parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VarianceProfile {
    sigmas: Vec<f64>,
}

impl VarianceProfile {
    /// Validates and sorts the scales.
    pub fn new(mut sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((index, &value)) = sigmas
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::InvalidScale { index, value });
        }
        sigmas.sort_by(f64::total_cmp);
        Ok(Self { sigmas })
    }

    pub fn constant(sigma: f64, n: usize) -> Result<Self> {
        Self::new(vec![sigma; n])
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// Multiplies every scale by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.sigmas.iter().map(|s| s * c).collect())
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.sigmas
            .iter()
            .map(|s| s * s)
            .collect::<CompensatedSum>()
            .total()
    }

    pub fn inverse_variance_sum(&self) -> f64 {
        self.sigmas
            .iter()
            .map(|s| (s * s).recip())
            .collect::<CompensatedSum>()
            .total()
    }
}

impl TryFrom<Vec<f64>> for VarianceProfile {
    type Error = Error;

    fn try_from(sigmas: Vec<f64>) -> Result<Self> {
        Self::new(sigmas)
    }
}

impl From<VarianceProfile> for Vec<f64> {
    fn from(p: VarianceProfile) -> Self {
        p.sigmas
    }
}

/// Identifies a deviation bound; the serialized names are the report column values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundName {
    /// Gaussian tail bound for the empirical mean.
    #[serde(rename = "mean_eq1")]
    Mean,
    /// Gaussian tail bound for the inverse-variance weighted mean.
    #[serde(rename = "mle_eq2")]
    Mle,
    /// Median upper bound for a density constant C.
    #[serde(rename = "median_thm1")]
    MedianUpper,
    /// Median upper bound specialised to Gaussian data.
    #[serde(rename = "median_cor1")]
    MedianUpperGaussian,
    /// Median lower bound (event of probability at least δ), Gaussian data.
    #[serde(rename = "median_lower_thm2")]
    MedianLower,
    /// Xia's median bound, valid under a lower bound on σ₁.
    #[serde(rename = "xia_prop1")]
    Xia,
    /// Devroye–Lattanzi–Lugosi–Zhivotovskiy median bound.
    #[serde(rename = "devroye_eq4")]
    Devroye,
}

impl BoundName {
    pub const ALL: [BoundName; 7] = [
        BoundName::Mean,
        BoundName::Mle,
        BoundName::MedianUpper,
        BoundName::MedianUpperGaussian,
        BoundName::MedianLower,
        BoundName::Xia,
        BoundName::Devroye,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Mean => "mean_eq1",
            BoundName::Mle => "mle_eq2",
            BoundName::MedianUpper => "median_thm1",
            BoundName::MedianUpperGaussian => "median_cor1",
            BoundName::MedianLower => "median_lower_thm2",
            BoundName::Xia => "xia_prop1",
            BoundName::Devroye => "devroye_eq4",
        }
    }

    /// True for the one bound that is a lower bound on the deviation.
    pub fn is_lower_bound(self) -> bool {
        self == BoundName::MedianLower
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown bound name '{s}'")))
    }
}

/// Rounded constants as they are usually quoted, kept for display only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedConstants {
    pub coefficient: f64,
    pub trim_coefficient: f64,
}

/// One evaluated bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: BoundName,
    /// Half-width of the deviation interval; `None` when the formula is undefined
    /// (trim index ≥ n, missing tail constant, model without finite variance).
    pub value: Option<f64>,
    pub delta: f64,
    /// The `j` (or `k_t`) used by the bound; 0 when not applicable.
    pub trim_index: usize,
    pub applicable: bool,
    pub applicability_note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_constants: Option<PublishedConstants>,
}

impl BoundReport {
    /// A report for a bound that does not apply to the model at hand.
    pub fn inapplicable(bound_name: BoundName, delta: f64, note: impl Into<String>) -> Self {
        Self {
            bound_name,
            value: None,
            delta,
            trim_index: 0,
            applicable: false,
            applicability_note: note.into(),
            published_constants: None,
        }
    }

    /// The value, if the bound is applicable.
    pub fn applicable_value(&self) -> Option<f64> {
        self.value.filter(|_| self.applicable)
    }
}

/// Density constant of the unit Gaussian on [0, 1]: e^{-1/2}/√(2π).
pub fn gaussian_density_constant() -> f64 {
    (-0.5f64).exp() / (2.0 * PI).sqrt()
}

/// 1/(C√2) for the Gaussian constant, i.e. √π·e^{1/2}.
pub fn gaussian_upper_coefficient() -> f64 {
    PI.sqrt() * 0.5f64.exp()
}

/// Leading coefficient of the Gaussian median lower bound, (2−√2)√π/8.
pub fn lower_bound_coefficient() -> f64 {
    (2.0 - SQRT_2) * PI.sqrt() / 8.0
}

/// Trim coefficient of the Gaussian median lower bound, (√2−1)/8.
pub fn lower_bound_trim_coefficient() -> f64 {
    (SQRT_2 - 1.0) / 8.0
}

/// Coefficient of Xia's bound, √2/0.35.
pub fn xia_coefficient() -> f64 {
    SQRT_2 / 0.35
}

pub const UPPER_PUBLISHED: PublishedConstants = PublishedConstants {
    coefficient: 2.93,
    trim_coefficient: 2.93,
};

pub const LOWER_PUBLISHED: PublishedConstants = PublishedConstants {
    coefficient: 0.13,
    trim_coefficient: 0.05,
};

/// Σ_{i=j+1}^{n} 1/σᵢ: the reciprocals of the n−j largest scales.
pub fn trimmed_inverse_scale_sum(profile: &VarianceProfile, j: usize) -> Result<f64> {
    let n = profile.len();
    if j >= n {
        return Err(Error::TrimIndex { j, n });
    }
    Ok(profile.sigmas[j..]
        .iter()
        .map(|s| s.recip())
        .collect::<CompensatedSum>()
        .total())
}

/// Floor of a nonnegative real trim level as an index.
fn trim_floor(level: f64) -> usize {
    debug_assert!(level >= 0.0);
    level.floor() as usize
}

/// √(2 (Σσᵢ²) log(1/δ)) / n.
pub fn mean_deviation_bound(profile: &VarianceProfile, delta: f64) -> Result<BoundReport> {
    check_delta(delta)?;
    let n = profile.len() as f64;
    let value = (2.0 * profile.sum_of_squares() * (1.0 / delta).ln()).sqrt() / n;
    Ok(BoundReport {
        bound_name: BoundName::Mean,
        value: Some(value),
        delta,
        trim_index: 0,
        applicable: true,
        applicability_note: String::new(),
        published_constants: None,
    })
}

/// √(2 log(1/δ) / Σσᵢ⁻²).
pub fn mle_deviation_bound(profile: &VarianceProfile, delta: f64) -> Result<BoundReport> {
    check_delta(delta)?;
    let value = (2.0 * (1.0 / delta).ln() / profile.inverse_variance_sum()).sqrt();
    Ok(BoundReport {
        bound_name: BoundName::Mle,
        value: Some(value),
        delta,
        trim_index: 0,
        applicable: true,
        applicability_note: "oracle: needs the true scales".into(),
        published_constants: None,
    })
}

/// Median upper bound for observations whose unit density on [0, 1] is at least `c_const`:
///
/// ```text
/// |med − θ| ≤ (1/(C√2)) √(n log(2/δ)) / Σ_{i=j+1}^n σᵢ⁻¹,   j = ⌊(1/(C√2)) √(n log(1/δ))⌋
/// ```
///
/// with probability at least 1 − δ, provided δ > exp(−2nC²).
pub fn median_upper_bound(
    profile: &VarianceProfile,
    delta: f64,
    c_const: f64,
) -> Result<BoundReport> {
    if !(c_const > 0.0 && c_const < 1.0) {
        return Err(Error::OutOfRange {
            name: "C",
            value: c_const,
            expected: "0 < C < 1",
        });
    }
    check_delta(delta)?;
    let n = profile.len();
    let nf = n as f64;
    let coefficient = 1.0 / (c_const * SQRT_2);
    let j = trim_floor(coefficient * (nf * (1.0 / delta).ln()).sqrt());
    let delta_floor = (-2.0 * nf * c_const * c_const).exp();

    let value = if j < n {
        Some(
            coefficient * (nf * (2.0 / delta).ln()).sqrt() / trimmed_inverse_scale_sum(profile, j)?,
        )
    } else {
        None
    };
    let (applicable, note) = if delta > delta_floor && j < n {
        (true, String::new())
    } else {
        (
            false,
            format!("delta must exceed exp(-2nC^2) = {delta_floor:.3e} (trim index {j}, n = {n})"),
        )
    };
    Ok(BoundReport {
        bound_name: BoundName::MedianUpper,
        value,
        delta,
        trim_index: j.min(n - 1),
        applicable,
        applicability_note: note,
        published_constants: None,
    })
}

/// [`median_upper_bound`] with the Gaussian constant C = e^{-1/2}/√(2π).
pub fn median_upper_bound_gaussian(profile: &VarianceProfile, delta: f64) -> Result<BoundReport> {
    let mut report = median_upper_bound(profile, delta, gaussian_density_constant())?;
    report.bound_name = BoundName::MedianUpperGaussian;
    report.published_constants = Some(UPPER_PUBLISHED);
    if !report.applicable {
        let floor = (-(profile.len() as f64) / (E * PI)).exp();
        report.applicability_note = format!("delta must exceed exp(-n/(e*pi)) = {floor:.3e}");
    }
    Ok(report)
}

/// Gaussian median lower bound: with probability at least δ,
///
/// ```text
/// |med − θ| ≥ ((2−√2)√π/8) √(n log(1/δ)) / Σ_{i=j+1}^n σᵢ⁻¹,   j = ⌊((√2−1)/8) √(n log(1/δ))⌋
/// ```
///
/// for δ ∈ (exp(−(√2−1)²n), 1/4). Usually quoted with the rounded 0.13 and 0.05.
pub fn median_lower_bound_gaussian(profile: &VarianceProfile, delta: f64) -> Result<BoundReport> {
    check_delta(delta)?;
    let n = profile.len();
    let nf = n as f64;
    let spread = (nf * (1.0 / delta).ln()).sqrt();
    let j = trim_floor(lower_bound_trim_coefficient() * spread);
    let delta_floor = (-(SQRT_2 - 1.0).powi(2) * nf).exp();

    let value = if j < n {
        Some(lower_bound_coefficient() * spread / trimmed_inverse_scale_sum(profile, j)?)
    } else {
        None
    };
    let applicable = delta > delta_floor && delta < 0.25 && j < n;
    let note = if applicable {
        String::new()
    } else {
        format!("delta must lie in (exp(-(sqrt2-1)^2 n), 1/4) = ({delta_floor:.3e}, 0.25)")
    };
    Ok(BoundReport {
        bound_name: BoundName::MedianLower,
        value,
        delta,
        trim_index: j.min(n - 1),
        applicable,
        applicability_note: note,
        published_constants: Some(LOWER_PUBLISHED),
    })
}

/// Xia's bound (√2/0.35) √(n log(2/δ)) / Σσᵢ⁻¹, valid when σ₁ exceeds twice that value.
pub fn xia_bound(profile: &VarianceProfile, delta: f64) -> Result<BoundReport> {
    check_delta(delta)?;
    let nf = profile.len() as f64;
    let value = xia_coefficient() * (nf * (2.0 / delta).ln()).sqrt()
        / trimmed_inverse_scale_sum(profile, 0)?;
    let sigma_min = profile.sigmas[0];
    let applicable = sigma_min > 2.0 * value;
    let note = if applicable {
        String::new()
    } else {
        format!(
            "requires sigma_1 > {:.6e}, got {sigma_min:.6e}; the trimmed median bound has no such condition",
            2.0 * value
        )
    };
    Ok(BoundReport {
        bound_name: BoundName::Xia,
        value: Some(value),
        delta,
        trim_index: 0,
        applicable,
        applicability_note: note,
        published_constants: None,
    })
}

/// Devroye et al. median bound:
///
/// ```text
/// 8e√2 · max(log(3/δ), log(n+1)) · β⁻¹ · max_{1 ≤ j ≤ L} (L + 1 − j) / Σ_{i=j}^n σᵢ⁻¹,
/// L = 8√(2n log(6/δ))
/// ```
///
/// scanned over every integer `j`. `beta` is the exponential lower-tail
/// constant P(|Z| ≥ t) ≥ e^{−βt}.
pub fn devroye_bound(profile: &VarianceProfile, delta: f64, beta: f64) -> Result<BoundReport> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            expected: "beta > 0",
        });
    }
    check_delta(delta)?;
    let n = profile.len();
    let nf = n as f64;
    let limit = 8.0 * (2.0 * nf * (6.0 / delta).ln()).sqrt();
    let j_max = trim_floor(limit);
    if j_max >= n {
        return Ok(BoundReport::inapplicable(
            BoundName::Devroye,
            delta,
            format!("j-range exceeds n ({j_max} >= {n})"),
        ));
    }

    // suffix[k] = Σ_{i>=k} 1/σᵢ (0-based)
    let mut suffix = vec![0.0; n + 1];
    let mut acc = CompensatedSum::new();
    for k in (0..n).rev() {
        acc.add(profile.sigmas[k].recip());
        suffix[k] = acc.total();
    }
    let (mut best, mut best_j) = (f64::NEG_INFINITY, 1);
    for j in 1..=j_max {
        let ratio = (limit + 1.0 - j as f64) / suffix[j - 1];
        if ratio > best {
            best = ratio;
            best_j = j;
        }
    }
    let log_factor = (3.0 / delta).ln().max((nf + 1.0).ln());
    let value = 8.0 * E * SQRT_2 * log_factor / beta * best;
    Ok(BoundReport {
        bound_name: BoundName::Devroye,
        value: Some(value),
        delta,
        trim_index: best_j,
        applicable: true,
        applicability_note:
            "needs P(|Z| >= t) >= exp(-beta t) for all t > 0; Gaussian tails do not satisfy this"
                .into(),
        published_constants: None,
    })
}

/// Comparison of the median's trimmed bound shape with the mean's deviation scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceOutcome {
    pub trim_index: usize,
    /// √n / Σ_{i=j+1}^n σᵢ⁻¹
    pub lhs: f64,
    /// 2√2 √(Σσᵢ²) / n
    pub rhs: f64,
    pub holds: bool,
    /// rhs / lhs
    pub ratio: f64,
}

/// ⌈√n⌉ computed in integers.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

/// Checks √n / Σ_{i=j+1}^n σᵢ⁻¹ ≤ 2√2 √(Σσᵢ²)/n with j = ⌈√n⌉.
///
/// Note that at n = 5 this trim leaves only two scales and the inequality
/// can fail (e.g. σ = (ε, ε, ε, 1, 1)); [`dominance_check_at`] with
/// `j = ⌈√n⌉ − 1` keeps every index i ≥ √n and holds for all n ≥ 4.
pub fn dominance_check(profile: &VarianceProfile) -> Result<DominanceOutcome> {
    let n = profile.len();
    if n < 4 {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            expected: "n >= 4",
        });
    }
    dominance_check_at(profile, ceil_sqrt(n))
}

/// The dominance comparison for an explicit trim index `j < n`.
pub fn dominance_check_at(profile: &VarianceProfile, j: usize) -> Result<DominanceOutcome> {
    let nf = profile.len() as f64;
    let lhs = nf.sqrt() / trimmed_inverse_scale_sum(profile, j)?;
    let rhs = 2.0 * SQRT_2 * profile.sum_of_squares().sqrt() / nf;
    Ok(DominanceOutcome {
        trim_index: j,
        lhs,
        rhs,
        holds: lhs <= rhs,
        ratio: rhs / lhs,
    })
}

/// Dominance comparison with the trim that keeps every index i ≥ √n,
/// i.e. j = ⌈√n⌉ − 1. Unlike [`dominance_check`] this holds
/// for all n ≥ 4.
pub fn dominance_check_keeping_root_index(profile: &VarianceProfile) -> Result<DominanceOutcome> {
    let n = profile.len();
    if n < 4 {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            expected: "n >= 4",
        });
    }
    dominance_check_at(profile, ceil_sqrt(n) - 1)
}

/// Every bound for one profile and δ, applicable ones first in ascending value.
///
/// `beta` feeds the Devroye row (marked inapplicable when absent) and
/// `c_const` the generic median upper bound.
pub fn compare_all(
    profile: &VarianceProfile,
    delta: f64,
    beta: Option<f64>,
    c_const: f64,
) -> Result<Vec<BoundReport>> {
    let devroye = match beta {
        Some(b) => devroye_bound(profile, delta, b)?,
        None => BoundReport::inapplicable(BoundName::Devroye, delta, "beta not supplied"),
    };
    let mut reports = vec![
        mean_deviation_bound(profile, delta)?,
        mle_deviation_bound(profile, delta)?,
        median_upper_bound(profile, delta, c_const)?,
        median_upper_bound_gaussian(profile, delta)?,
        median_lower_bound_gaussian(profile, delta)?,
        xia_bound(profile, delta)?,
        devroye,
    ];
    reports.sort_by(|a, b| match (a.applicable_value(), b.applicable_value()) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(reports)
}
