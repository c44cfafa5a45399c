//! Monte Carlo coverage and estimator-comparison experiments.
//!
//! A trial draws `Xᵢ = θ + σᵢ Zᵢ` with `Zᵢ = F⁻¹(Uᵢ)` for the family's unit
//! distribution function `F`, where `Uᵢ` is the counter-based uniform keyed by
//! `(seed, trial, i)`. Each trial is therefore a pure function of the config
//! and its index; trials run in parallel and are collected in index order.

use crate::bounds::{compare_all, BoundName, BoundReport, VarianceProfile};
use crate::error::{check_delta, Error, Result};
use crate::estimators::{mean_unchecked, median_in_place, weighted_mean, Dataset};
use crate::rng::TrialStream;
use crate::special::{
    cauchy_quantile, laplace_quantile, normal_quantile, student_t_pdf, student_t_quantile,
};
use crate::stats::{clopper_pearson, nearest_rank_quantile, CompensatedSum, ProportionInterval};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

/// Confidence level of the exceedance intervals.
pub const COVERAGE_CONFIDENCE: f64 = 0.99;

/// Degrees of freedom used when `student_t` is given without one.
pub const DEFAULT_STUDENT_T_NU: f64 = 3.0;

/// Error quantiles reported by the estimator comparison.
pub const ERROR_QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

/// Unit noise distribution, symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    Gaussian,
    Laplace,
    StudentT { nu: f64 },
    Cauchy,
}

impl Family {
    /// Inverse distribution function of the unit draw.
    #[inline]
    pub fn quantile(self, u: f64) -> f64 {
        match self {
            Family::Gaussian => normal_quantile(u),
            Family::Laplace => laplace_quantile(u),
            Family::StudentT { nu } => student_t_quantile(u, nu),
            Family::Cauchy => cauchy_quantile(u),
        }
    }

    pub fn is_gaussian(self) -> bool {
        matches!(self, Family::Gaussian)
    }

    fn validate(self) -> Result<Self> {
        if let Family::StudentT { nu } = self {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::OutOfRange {
                    name: "nu",
                    value: nu,
                    expected: "a finite positive number",
                });
            }
        }
        Ok(self)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gaussian => f.write_str("gaussian"),
            Family::Laplace => f.write_str("laplace"),
            Family::StudentT { nu } => write!(f, "student_t:{nu}"),
            Family::Cauchy => f.write_str("cauchy"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = split_spec(s)?;
        let family = match (name, arg) {
            ("gaussian" | "normal", None) => Family::Gaussian,
            ("laplace", None) => Family::Laplace,
            ("cauchy", None) => Family::Cauchy,
            ("student_t", None) => Family::StudentT {
                nu: DEFAULT_STUDENT_T_NU,
            },
            ("student_t", Some(arg)) => Family::StudentT {
                nu: parse_number(arg, "nu")?,
            },
            _ => {
                return Err(Error::Invalid(format!(
                    "unknown family `{s}` (expected gaussian, laplace, cauchy, student_t or student_t:<nu>)"
                )))
            }
        };
        family.validate()
    }
}

impl TryFrom<String> for Family {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

/// Splits `name:args` or `name(args)` into its parts.
fn split_spec(s: &str) -> Result<(&str, Option<&str>)> {
    if let Some((name, rest)) = s.split_once(':') {
        return Ok((name.trim(), Some(rest.trim())));
    }
    if let Some((name, rest)) = s.split_once('(') {
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Invalid(format!("unbalanced parentheses in `{s}`")))?;
        return Ok((name.trim(), Some(args.trim())));
    }
    Ok((s, None))
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Invalid(format!("cannot parse {what} from `{s}`")))
}

/// Recipe for a variance profile of any length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpecRepr", into = "ProfileSpecRepr")]
pub enum ProfileSpec {
    /// σᵢ = σ.
    Constant(f64),
    /// σᵢ = start · ratio^(i−1).
    Geometric {
        start: f64,
        ratio: f64,
    },
    /// σᵢ = i^α.
    Polynomial(f64),
    /// σ₁ = ε, all others 1.
    OneTiny(f64),
    /// σₙ = M, all others 1.
    OneHuge(f64),
    Explicit(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProfileSpecRepr {
    Text(String),
    List(Vec<f64>),
}

impl TryFrom<ProfileSpecRepr> for ProfileSpec {
    type Error = Error;
    fn try_from(r: ProfileSpecRepr) -> Result<Self> {
        match r {
            ProfileSpecRepr::Text(s) => s.parse(),
            ProfileSpecRepr::List(v) => Ok(ProfileSpec::Explicit(v)),
        }
    }
}

impl From<ProfileSpec> for ProfileSpecRepr {
    fn from(p: ProfileSpec) -> Self {
        match p {
            ProfileSpec::Explicit(v) => ProfileSpecRepr::List(v),
            other => ProfileSpecRepr::Text(other.to_string()),
        }
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Constant(s) => write!(f, "constant:{s}"),
            ProfileSpec::Geometric { start, ratio } => write!(f, "geometric:{start},{ratio}"),
            ProfileSpec::Polynomial(a) => write!(f, "polynomial:{a}"),
            ProfileSpec::OneTiny(e) => write!(f, "one_tiny:{e}"),
            ProfileSpec::OneHuge(m) => write!(f, "one_huge:{m}"),
            ProfileSpec::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = Error;

    /// Parses `constant:1`, `geometric:1,1.2`, `polynomial:1`, `one_tiny:1e-6`,
    /// `one_huge:1e6` or `explicit:1,2,3` (parenthesised forms work too).
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = split_spec(s.trim())?;
        let arg = arg.ok_or_else(|| Error::Invalid(format!("profile `{s}` needs parameters")))?;
        let nums = arg
            .split(',')
            .map(|p| parse_number(p, "profile parameter"))
            .collect::<Result<Vec<f64>>>()?;
        let one = |nums: &[f64]| -> Result<f64> {
            match nums {
                [x] => Ok(*x),
                _ => Err(Error::Invalid(format!(
                    "profile `{name}` takes exactly one parameter"
                ))),
            }
        };
        let spec = match name {
            "constant" => ProfileSpec::Constant(one(&nums)?),
            "geometric" => match nums[..] {
                [start, ratio] => ProfileSpec::Geometric { start, ratio },
                _ => {
                    return Err(Error::Invalid(
                        "profile `geometric` takes two parameters: start,ratio".into(),
                    ))
                }
            },
            "polynomial" => ProfileSpec::Polynomial(one(&nums)?),
            "one_tiny" => ProfileSpec::OneTiny(one(&nums)?),
            "one_huge" => ProfileSpec::OneHuge(one(&nums)?),
            "explicit" => ProfileSpec::Explicit(nums),
            _ => return Err(Error::Invalid(format!("unknown profile kind `{name}`"))),
        };
        Ok(spec)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            expected: "a finite positive number",
        })
    }
}

/// Builds the ascending profile of length `n` described by `spec`.
pub fn materialize_profile(spec: &ProfileSpec, n: usize) -> Result<VarianceProfile> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let sigmas = match *spec {
        ProfileSpec::Constant(s) => vec![positive("sigma", s)?; n],
        ProfileSpec::Geometric { start, ratio } => {
            let start = positive("start", start)?;
            let ratio = positive("ratio", ratio)?;
            (0..n).map(|i| start * ratio.powi(i as i32)).collect()
        }
        ProfileSpec::Polynomial(alpha) => {
            let alpha = positive("alpha", alpha)?;
            (1..=n).map(|i| (i as f64).powf(alpha)).collect()
        }
        ProfileSpec::OneTiny(eps) => {
            let mut v = vec![1.0; n];
            v[0] = positive("epsilon", eps)?;
            v
        }
        ProfileSpec::OneHuge(m) => {
            let mut v = vec![1.0; n];
            v[n - 1] = positive("M", m)?;
            v
        }
        ProfileSpec::Explicit(ref v) => {
            if v.len() != n {
                return Err(Error::Invalid(format!(
                    "explicit profile has {} entries but n = {n}",
                    v.len()
                )));
            }
            v.clone()
        }
    };
    VarianceProfile::new(sigmas)
}

/// Lower bound C on the unit density over [0, 1]; the density at 1 for these
/// symmetric unimodal families.
pub fn constant_c_for(family: Family) -> Result<f64> {
    let c = match family.validate()? {
        Family::Gaussian => (-0.5f64).exp() / (2.0 * PI).sqrt(),
        Family::Laplace => 0.5 / E,
        Family::Cauchy => 0.5 / PI,
        Family::StudentT { nu } => student_t_pdf(1.0, nu),
    };
    if c > 0.0 && c < 1.0 {
        Ok(c)
    } else {
        Err(Error::Invalid(format!(
            "density constant {c} for {family} is outside (0, 1)"
        )))
    }
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub family: Family,
    pub profile_spec: ProfileSpec,
    pub n: usize,
    #[serde(default)]
    pub theta: f64,
    pub deltas: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationConfig {
    /// Every accepted key, for strict-schema diagnostics.
    pub const FIELDS: [&'static str; 7] = [
        "family",
        "profile_spec",
        "n",
        "theta",
        "deltas",
        "trials",
        "seed",
    ];

    /// Checks the invariants and materializes the profile.
    pub fn validate(&self) -> Result<VarianceProfile> {
        self.family.validate()?;
        if self.n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if !self.theta.is_finite() {
            return Err(Error::OutOfRange {
                name: "theta",
                value: self.theta,
                expected: "a finite number",
            });
        }
        if self.deltas.is_empty() {
            return Err(Error::Invalid("deltas must not be empty".into()));
        }
        for &d in &self.deltas {
            check_delta(d)?;
        }
        materialize_profile(&self.profile_spec, self.n)
    }
}

/// Fills `out` with θ + σᵢ F⁻¹(U(seed, trial, i)).
fn fill_values(family: Family, theta: f64, sigmas: &[f64], seed: u64, trial: u64, out: &mut [f64]) {
    let mut stream = TrialStream::new(seed, trial);
    for (x, &s) in out.iter_mut().zip(sigmas) {
        *x = theta + s * family.quantile(stream.next_uniform());
    }
}

/// The `trial_index`-th dataset of an experiment, with its scales and θ attached.
pub fn generate_dataset(
    family: Family,
    theta: f64,
    profile: &VarianceProfile,
    seed: u64,
    trial_index: u64,
) -> Result<Dataset> {
    family.validate()?;
    let sigmas = profile.sigmas();
    let mut values = vec![0.0; sigmas.len()];
    fill_values(family, theta, sigmas, seed, trial_index, &mut values);
    Ok(Dataset::with_scales(values, sigmas.to_vec())?.with_true_location(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
    Inapplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Inapplicable => "inapplicable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exceedance tally of one bound at one δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub bound_name: BoundName,
    pub delta: f64,
    pub bound_value: Option<f64>,
    pub trim_index: usize,
    pub trials: u64,
    pub exceedances: Option<u64>,
    pub empirical: Option<f64>,
    /// Two-sided Clopper–Pearson interval at [`COVERAGE_CONFIDENCE`].
    pub ci: Option<ProportionInterval>,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn any_violated(&self) -> bool {
        self.rows.iter().any(|r| r.verdict == Verdict::Violated)
    }

    pub fn row(&self, name: BoundName, delta: f64) -> Option<&CoverageRow> {
        self.rows
            .iter()
            .find(|r| r.bound_name == name && r.delta == delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Mean,
    Median,
    /// Inverse-variance weighted mean using the true scales.
    MleOracle,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Mean, Estimator::Median, Estimator::MleOracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Mean => "mean",
            Estimator::Median => "median",
            Estimator::MleOracle => "mle_oracle",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nearest-rank quantiles of |estimate − θ| over all trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorQuantiles {
    pub estimator: Estimator,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub coverage: CoverageReport,
    pub quantiles: Vec<EstimatorQuantiles>,
}

impl ExperimentReport {
    pub fn quantiles_for(&self, estimator: Estimator) -> Option<&EstimatorQuantiles> {
        self.quantiles.iter().find(|q| q.estimator == estimator)
    }
}

#[derive(Debug, Clone, Copy)]
struct TrialErrors {
    mean: f64,
    median: f64,
    mle: f64,
}

impl TrialErrors {
    fn get(&self, e: Estimator) -> f64 {
        match e {
            Estimator::Mean => self.mean,
            Estimator::Median => self.median,
            Estimator::MleOracle => self.mle,
        }
    }
}

/// Estimator whose error a bound controls.
fn controlled_estimator(name: BoundName) -> Estimator {
    match name {
        BoundName::Mean => Estimator::Mean,
        BoundName::Mle => Estimator::MleOracle,
        _ => Estimator::Median,
    }
}

/// Bounds proved only for Gaussian observations.
fn requires_gaussian(name: BoundName) -> bool {
    matches!(
        name,
        BoundName::Mean
            | BoundName::Mle
            | BoundName::MedianUpperGaussian
            | BoundName::MedianLower
            | BoundName::Xia
    )
}

/// [`compare_all`] with the density constant of `family`; bounds proved
/// only for Gaussian observations are marked inapplicable for other families.
pub fn family_bound_reports(
    family: Family,
    profile: &VarianceProfile,
    delta: f64,
    beta: Option<f64>,
) -> Result<Vec<BoundReport>> {
    let c_const = constant_c_for(family)?;
    let mut reports = compare_all(profile, delta, beta, c_const)?;
    if !family.is_gaussian() {
        for r in &mut reports {
            if requires_gaussian(r.bound_name) {
                *r = BoundReport::inapplicable(
                    r.bound_name,
                    delta,
                    format!("requires Gaussian observations, family is {family}"),
                );
            }
        }
        // keep applicable rows first
        reports.sort_by_key(|r| !r.applicable);
    }
    Ok(reports)
}

fn tally(report: &BoundReport, errors: &[TrialErrors]) -> CoverageRow {
    let trials = errors.len() as u64;
    let mut row = CoverageRow {
        bound_name: report.bound_name,
        delta: report.delta,
        bound_value: report.value,
        trim_index: report.trim_index,
        trials,
        exceedances: None,
        empirical: None,
        ci: None,
        verdict: Verdict::Inapplicable,
        note: report.applicability_note.clone(),
    };
    let Some(value) = report.applicable_value() else {
        return row;
    };
    let est = controlled_estimator(report.bound_name);
    let lower = report.bound_name.is_lower_bound();
    let count = errors
        .iter()
        .filter(|e| {
            let err = e.get(est);
            if lower {
                err >= value
            } else {
                err > value
            }
        })
        .count() as u64;
    let ci = clopper_pearson(count, trials, COVERAGE_CONFIDENCE);
    let violated = if lower {
        ci.high < report.delta
    } else {
        ci.low > report.delta
    };
    row.exceedances = Some(count);
    row.empirical = Some(count as f64 / trials as f64);
    row.ci = Some(ci);
    row.verdict = if violated {
        Verdict::Violated
    } else {
        Verdict::Consistent
    };
    row
}

struct Scratch {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

/// Runs every trial once and derives both the coverage report and the error quantiles.
///
/// Bounds are evaluated once per δ before the trial loop. Upper-bound rows
/// count `|err| > bound`, the lower-bound row counts `|err| ≥ bound`. The
/// result does not depend on the size of the rayon pool it runs in.
pub fn run_experiment(config: &SimulationConfig) -> Result<ExperimentReport> {
    let profile = config.validate()?;
    let family = config.family;
    let mut reports = Vec::new();
    for &delta in &config.deltas {
        let mut rows = family_bound_reports(family, &profile, delta, None)?;
        rows.sort_by_key(|r| BoundName::ALL.iter().position(|&b| b == r.bound_name));
        reports.extend(rows);
    }

    let sigmas = profile.sigmas();
    let weights: Vec<f64> = sigmas.iter().map(|s| (s * s).recip()).collect();
    let weight_total = weights.iter().copied().collect::<CompensatedSum>().total();
    let n = sigmas.len();
    let theta = config.theta;

    let errors: Vec<TrialErrors> = (0..config.trials)
        .into_par_iter()
        .map_init(
            || Scratch {
                values: vec![0.0; n],
                sorted: vec![0.0; n],
            },
            |s, trial| {
                fill_values(family, theta, sigmas, config.seed, trial, &mut s.values);
                let mean = mean_unchecked(&s.values);
                let mle = weighted_mean(&s.values, &weights, weight_total);
                s.sorted.copy_from_slice(&s.values);
                let median = median_in_place(&mut s.sorted);
                TrialErrors {
                    mean: (mean - theta).abs(),
                    median: (median - theta).abs(),
                    mle: (mle - theta).abs(),
                }
            },
        )
        .collect();

    let rows = reports.iter().map(|r| tally(r, &errors)).collect();
    let quantiles = Estimator::ALL
        .iter()
        .map(|&est| {
            let mut errs: Vec<f64> = errors.iter().map(|e| e.get(est)).collect();
            errs.sort_by(f64::total_cmp);
            EstimatorQuantiles {
                estimator: est,
                q50: nearest_rank_quantile(&errs, ERROR_QUANTILES[0]),
                q90: nearest_rank_quantile(&errs, ERROR_QUANTILES[1]),
                q99: nearest_rank_quantile(&errs, ERROR_QUANTILES[2]),
            }
        })
        .collect();
    Ok(ExperimentReport {
        coverage: CoverageReport { rows },
        quantiles,
    })
}

pub fn run_coverage(config: &SimulationConfig) -> Result<CoverageReport> {
    run_experiment(config).map(|r| r.coverage)
}

pub fn run_estimator_comparison(config: &SimulationConfig) -> Result<Vec<EstimatorQuantiles>> {
    run_experiment(config).map(|r| r.quantiles)
}
