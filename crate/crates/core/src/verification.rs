//! Seeded randomized suites over the exact oracles and the dominance
//! inequality. Each suite returns a summary with every per-case margin so
//! callers can print or assert on it.

use crate::bounds::{
    dominance_check, dominance_check_keeping_root_index, DominanceOutcome, VarianceProfile,
};
use crate::error::{Error, Result};
use crate::oracles::{
    corollary2_range_check, corollary2_safe_factor, lemma1_exact_check, lemma2_equivalence_check,
    Lemma1Outcome, Lemma2Outcome,
};
use crate::rng::bits_to_open_unit;
use crate::special::normal_quantile;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest δ at which the anticoncentration check is asserted; above it cases are report-only.
pub const LEMMA1_ENFORCED_DELTA: f64 = 0.25;

/// Slack allowed below 1/4 on the exceedance-probability grid.
pub const COROLLARY2_SLACK: f64 = 1e-9;

/// How the Bernoulli parameters of an anticoncentration case are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbabilityMode {
    /// pᵢ = 1/2 for all i.
    Half,
    /// `draws` independent vectors with pᵢ uniform on [1/4, 3/4].
    Random { draws: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Case {
    /// Index of the random draw; `None` for pᵢ ≡ 1/2.
    pub draw: Option<usize>,
    pub outcome: Lemma1Outcome,
    /// False for δ above [`LEMMA1_ENFORCED_DELTA`].
    pub enforced: bool,
}

impl Lemma1Case {
    pub fn holds(&self) -> bool {
        self.outcome.stated.holds && self.outcome.derived.holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Summary {
    pub cases: Vec<Lemma1Case>,
}

impl Lemma1Summary {
    /// Enforced cases where either constant misses δ/2.
    pub fn failures(&self) -> impl Iterator<Item = &Lemma1Case> {
        self.cases.iter().filter(|c| c.enforced && !c.holds())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn min_enforced_margin(&self) -> f64 {
        self.cases
            .iter()
            .filter(|c| c.enforced)
            .map(|c| c.outcome.stated.margin.min(c.outcome.derived.margin))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact anticoncentration checks over the grid `n_list × delta_list`.
pub fn verify_lemma1(
    n_list: &[usize],
    delta_list: &[f64],
    mode: ProbabilityMode,
    seed: u64,
) -> Result<Lemma1Summary> {
    if n_list.is_empty() || delta_list.is_empty() {
        return Err(Error::Invalid("n and delta lists must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for &n in n_list {
        for &delta in delta_list {
            let enforced = delta <= LEMMA1_ENFORCED_DELTA;
            match mode {
                ProbabilityMode::Half => cases.push(Lemma1Case {
                    draw: None,
                    outcome: lemma1_exact_check(&vec![0.5; n], delta)?,
                    enforced,
                }),
                ProbabilityMode::Random { draws } => {
                    for draw in 0..draws {
                        let probs: Vec<f64> =
                            (0..n).map(|_| rng.random_range(0.25..=0.75)).collect();
                        cases.push(Lemma1Case {
                            draw: Some(draw),
                            outcome: lemma1_exact_check(&probs, delta)?,
                            enforced,
                        });
                    }
                }
            }
        }
    }
    Ok(Lemma1Summary { cases })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Disagreement {
    pub case: usize,
    pub values: Vec<f64>,
    pub scales: Vec<f64>,
    pub outcome: Lemma2Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Summary {
    pub cases: usize,
    /// Total (instance, t) evaluations.
    pub evaluations: usize,
    pub disagreements: Vec<Lemma2Disagreement>,
    /// Largest |(D − B) − (count − n/2)| seen.
    pub max_identity_residual: f64,
}

impl Lemma2Summary {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    bits_to_open_unit(rng.next_u64())
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * open_uniform(rng)).exp()
}

/// Centred Gaussian instances with n ≤ `max_n` and log-uniform scales in
/// [10⁻², 10²]. Every instance is checked at t = 0, at each non-negative data
/// point, at each non-negative midpoint between consecutive order
/// statistics, and at one uniform t in [0, max |xᵢ|].
pub fn verify_lemma2(cases: usize, max_n: usize, seed: u64) -> Result<Lemma2Summary> {
    if max_n == 0 {
        return Err(Error::Invalid("max_n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = Lemma2Summary {
        cases,
        evaluations: 0,
        disagreements: Vec::new(),
        max_identity_residual: 0.0,
    };
    let mut grid = Vec::new();
    for case in 0..cases {
        let n = rng.random_range(1..=max_n);
        let scales: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-2, 1e2)).collect();
        let values: Vec<f64> = scales
            .iter()
            .map(|s| s * normal_quantile(open_uniform(&mut rng)))
            .collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let reach = sorted.iter().fold(0.0f64, |m, x| m.max(x.abs()));

        grid.clear();
        grid.push(0.0);
        grid.extend(sorted.iter().copied().filter(|&x| x >= 0.0));
        grid.extend(
            sorted
                .windows(2)
                .map(|w| 0.5 * (w[0] + w[1]))
                .filter(|&m| m >= 0.0),
        );
        grid.push(reach * rng.random::<f64>());

        for &t in &grid {
            let outcome = lemma2_equivalence_check(&values, &scales, t)?;
            summary.evaluations += 1;
            summary.max_identity_residual = summary
                .max_identity_residual
                .max(outcome.identity_residual.abs());
            if !outcome.agree {
                summary.disagreements.push(Lemma2Disagreement {
                    case,
                    values: values.clone(),
                    scales: scales.clone(),
                    outcome,
                });
            }
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary2Summary {
    pub profiles: usize,
    pub grid: usize,
    /// Smallest pᵢ(t) over all profiles and grid points t ≤ (√(2π)/4)σ₁.
    pub min_p: f64,
    /// Largest pᵢ(t) over the same set.
    pub max_p: f64,
    /// Profiles whose grid left [1/4 − slack, 3/4 + slack].
    pub failing_profiles: Vec<usize>,
    /// Largest min pᵢ(σ₁) across profiles; below 1/4 means the threshold is not vacuous.
    pub max_min_p_at_sigma1: f64,
}

impl Corollary2Summary {
    pub fn passed(&self) -> bool {
        self.failing_profiles.is_empty()
    }

    pub fn non_vacuous(&self) -> bool {
        self.max_min_p_at_sigma1 < 0.25
    }
}

/// Checks pᵢ(t) ∈ [1/4, 3/4] on `grid` equally spaced points of
/// [0, (√(2π)/4)σ₁] for random profiles (n ≤ 50, log-uniform scales in
/// [10⁻³, 10³]), and records pᵢ(σ₁) as the non-vacuity witness.
pub fn verify_corollary2(profiles: usize, grid: usize, seed: u64) -> Result<Corollary2Summary> {
    if grid < 2 {
        return Err(Error::Invalid("grid must have at least 2 points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = corollary2_safe_factor();
    let mut summary = Corollary2Summary {
        profiles,
        grid,
        min_p: f64::INFINITY,
        max_p: f64::NEG_INFINITY,
        failing_profiles: Vec::new(),
        max_min_p_at_sigma1: f64::NEG_INFINITY,
    };
    for index in 0..profiles {
        let n = rng.random_range(1..=50);
        let sigmas: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1e3)).collect();
        let profile = VarianceProfile::new(sigmas)?;
        let sigma1 = profile.sigmas()[0];
        let mut ok = true;
        for k in 0..grid {
            let t = factor * sigma1 * k as f64 / (grid - 1) as f64;
            let out = corollary2_range_check(profile.sigmas(), t)?;
            summary.min_p = summary.min_p.min(out.min_p);
            summary.max_p = summary.max_p.max(out.max_p);
            ok &= out.min_p >= 0.25 - COROLLARY2_SLACK && out.max_p <= 0.75 + COROLLARY2_SLACK;
        }
        if !ok {
            summary.failing_profiles.push(index);
        }
        let witness = corollary2_range_check(profile.sigmas(), sigma1)?;
        summary.max_min_p_at_sigma1 = summary.max_min_p_at_sigma1.max(witness.min_p);
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceFailure {
    pub case: usize,
    pub n: usize,
    pub sigmas: Vec<f64>,
    pub outcome: DominanceOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceSummary {
    pub cases: usize,
    pub failures: Vec<DominanceFailure>,
    /// Smallest rhs/lhs seen with the ⌈√n⌉ trim.
    pub min_ratio: f64,
    /// Failures of the same profiles under the trim keeping i ≥ √n.
    pub root_index_failures: usize,
    pub root_index_min_ratio: f64,
}

impl DominanceSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random ascending profiles with n uniform on [4, `max_n`] and log-uniform
/// scales in [10⁻³, 10³].
pub fn verify_dominance(cases: usize, max_n: usize, seed: u64) -> Result<DominanceSummary> {
    if max_n < 4 {
        return Err(Error::Invalid("max_n must be at least 4".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = DominanceSummary {
        cases,
        failures: Vec::new(),
        min_ratio: f64::INFINITY,
        root_index_failures: 0,
        root_index_min_ratio: f64::INFINITY,
    };
    for case in 0..cases {
        let n = rng.random_range(4..=max_n);
        let sigmas: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1e3)).collect();
        let profile = VarianceProfile::new(sigmas)?;
        let outcome = dominance_check(&profile)?;
        summary.min_ratio = summary.min_ratio.min(outcome.ratio);
        if !outcome.holds {
            summary.failures.push(DominanceFailure {
                case,
                n,
                sigmas: profile.sigmas().to_vec(),
                outcome,
            });
        }
        let kept = dominance_check_keeping_root_index(&profile)?;
        summary.root_index_min_ratio = summary.root_index_min_ratio.min(kept.ratio);
        if !kept.holds {
            summary.root_index_failures += 1;
        }
    }
    Ok(summary)
}
