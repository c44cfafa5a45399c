use crate::error::CliResult;
use hetmed::verification::{
    verify_corollary2, verify_dominance, verify_lemma1, verify_lemma2, ProbabilityMode,
    COROLLARY2_SLACK,
};
use serde_json::json;

pub fn lemma1(
    n_list: &[usize],
    delta_list: &[f64],
    mode: ProbabilityMode,
    seed: u64,
    as_json: bool,
) -> CliResult<bool> {
    let summary = verify_lemma1(n_list, delta_list, mode, seed)?;
    let passed = summary.passed();
    if as_json {
        println!("{}", json!({ "passed": passed, "summary": summary }));
        return Ok(passed);
    }
    println!(
        "{:>5} {:>7} {:>5} {:>14} {:>10} {:>11} {:>14} {:>11}  status",
        "n", "delta", "draw", "tail(0.3)", "target", "margin", "tail(1-1/√2)", "margin"
    );
    for c in &summary.cases {
        let status = match (c.enforced, c.holds()) {
            (true, true) => "ok",
            (true, false) => "FAIL",
            (false, true) => "report-only ok",
            (false, false) => "report-only fails",
        };
        let o = &c.outcome;
        println!(
            "{:>5} {:>7} {:>5} {:>14.9} {:>10.6} {:>11.3e} {:>14.9} {:>11.3e}  {status}",
            o.n,
            o.delta,
            c.draw.map_or_else(|| "half".into(), |d| d.to_string()),
            o.stated.tail,
            o.stated.target,
            o.stated.margin,
            o.derived.tail,
            o.derived.margin,
        );
    }
    let margin = summary.min_enforced_margin();
    let margin = if margin.is_finite() {
        format!("{margin:.3e}")
    } else {
        "n/a (no enforced cases)".into()
    };
    println!(
        "{} cases, {} enforced failures, min enforced margin {margin}: {}",
        summary.cases.len(),
        summary.failures().count(),
        verdict(passed)
    );
    Ok(passed)
}

pub fn lemma2(cases: usize, max_n: usize, seed: u64, as_json: bool) -> CliResult<bool> {
    let summary = verify_lemma2(cases, max_n, seed)?;
    let passed = summary.passed();
    if as_json {
        println!("{}", json!({ "passed": passed, "summary": summary }));
        return Ok(passed);
    }
    for d in &summary.disagreements {
        println!(
            "case {}: t = {} median side {} counting side {} (count {} of {})",
            d.case,
            d.outcome.t,
            d.outcome.estimator_side,
            d.outcome.counting_side,
            d.outcome.count,
            d.values.len()
        );
    }
    println!(
        "{} instances, {} (instance, t) evaluations, {} disagreements, max |(D-B)-(count-n/2)| {:.3e}: {}",
        summary.cases,
        summary.evaluations,
        summary.disagreements.len(),
        summary.max_identity_residual,
        verdict(passed)
    );
    Ok(passed)
}

pub fn corollary2(profiles: usize, grid: usize, seed: u64, as_json: bool) -> CliResult<bool> {
    let summary = verify_corollary2(profiles, grid, seed)?;
    let passed = summary.passed() && summary.non_vacuous();
    if as_json {
        println!("{}", json!({ "passed": passed, "summary": summary }));
        return Ok(passed);
    }
    println!(
        "{} profiles x {} grid points on [0, (sqrt(2 pi)/4) sigma_1]",
        summary.profiles, summary.grid
    );
    println!(
        "min p {:.9} (margin {:.3e} above 1/4), max p {:.9}",
        summary.min_p,
        summary.min_p - 0.25,
        summary.max_p
    );
    println!(
        "largest min p at t = sigma_1: {:.9} (below 1/4: {})",
        summary.max_min_p_at_sigma1,
        summary.non_vacuous()
    );
    if !summary.failing_profiles.is_empty() {
        println!(
            "profiles outside [1/4 - {COROLLARY2_SLACK:e}, 3/4]: {:?}",
            summary.failing_profiles
        );
    }
    println!("{}", verdict(passed));
    Ok(passed)
}

pub fn dominance(cases: usize, max_n: usize, seed: u64, as_json: bool) -> CliResult<bool> {
    let summary = verify_dominance(cases, max_n, seed)?;
    let passed = summary.passed();
    if as_json {
        println!("{}", json!({ "passed": passed, "summary": summary }));
        return Ok(passed);
    }
    for f in &summary.failures {
        println!(
            "case {} n={} trim {}: lhs {:.6} > rhs {:.6} (rhs/lhs {:.4})",
            f.case, f.n, f.outcome.trim_index, f.outcome.lhs, f.outcome.rhs, f.outcome.ratio
        );
    }
    println!(
        "{} profiles, {} failures, min rhs/lhs {:.4}: {}",
        summary.cases,
        summary.failures.len(),
        summary.min_ratio,
        verdict(passed)
    );
    println!(
        "with trim ceil(sqrt(n)) - 1: {} failures, min rhs/lhs {:.4}",
        summary.root_index_failures, summary.root_index_min_ratio
    );
    Ok(passed)
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}
