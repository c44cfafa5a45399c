//! Point estimators of the common location of heteroscedastic observations.
//!
//! The empirical median here is always the *upper* median, the
//! (⌊n/2⌋+1)-th smallest value. With that convention, for every real `t`,
//!
//! ```text
//! median(x) >= t   <=>   #{i : x_i >= t} >= n/2
//! ```
//!
//! holds exactly for both parities of `n`, which the concentration
//! arguments for the median bounds rely on.

use crate::error::{Error, Result};
use crate::stats::CompensatedSum;
use serde::{Deserialize, Serialize};

/// Observations sharing one location, with optional per-observation scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    scales: Option<Vec<f64>>,
    true_location: Option<f64>,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        Ok(Self {
            values,
            scales: None,
            true_location: None,
        })
    }

    pub fn with_scales(values: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        check_scales(values.len(), &scales)?;
        Ok(Self {
            values,
            scales: Some(scales),
            true_location: None,
        })
    }

    pub fn with_true_location(mut self, theta: f64) -> Self {
        self.true_location = Some(theta);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scales(&self) -> Option<&[f64]> {
        self.scales.as_deref()
    }

    pub fn true_location(&self) -> Option<f64> {
        self.true_location
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn median(&self) -> f64 {
        median_in_place(&mut self.values.clone())
    }

    pub fn mean(&self) -> f64 {
        mean_unchecked(&self.values)
    }

    /// Oracle MLE, available only when scales were supplied.
    pub fn mle(&self) -> Option<f64> {
        self.scales
            .as_deref()
            .map(|s| mle_unchecked(&self.values, s))
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index, value });
    }
    Ok(())
}

fn check_scales(n: usize, scales: &[f64]) -> Result<()> {
    if scales.len() != n {
        return Err(Error::LengthMismatch {
            values: n,
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
    Ok(())
}

/// Upper empirical median: the (⌊n/2⌋+1)-th smallest value.
pub fn empirical_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(median_in_place(&mut values.to_vec()))
}

/// Upper median computed by selection; reorders `buf`.
pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    let k = buf.len() / 2;
    let (_, m, _) = buf.select_nth_unstable_by(k, f64::total_cmp);
    *m
}

pub fn empirical_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(mean_unchecked(values))
}

pub(crate) fn mean_unchecked(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().total() / values.len() as f64
}

/// Inverse-variance weighted mean Σσᵢ⁻²xᵢ / Σσᵢ⁻²; needs the true scales.
pub fn mle_oracle(values: &[f64], scales: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_scales(values.len(), scales)?;
    Ok(mle_unchecked(values, scales))
}

fn mle_unchecked(values: &[f64], scales: &[f64]) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (&x, &s) in values.iter().zip(scales) {
        let w = (s * s).recip();
        num.add(w * x);
        den.add(w);
    }
    num.total() / den.total()
}

/// Weighted mean with precomputed weights and their total.
#[inline]
pub(crate) fn weighted_mean(values: &[f64], weights: &[f64], weight_total: f64) -> f64 {
    let mut num = CompensatedSum::new();
    for (&x, &w) in values.iter().zip(weights) {
        num.add(w * x);
    }
    num.total() / weight_total
}
