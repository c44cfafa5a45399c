use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use hetmed::{family_bound_reports, materialize_profile, Family, ProfileSpec, VarianceProfile};
use serde_json::json;
use std::fs;
use std::path::Path;

/// Splits `constant:1,n=1000` into the profile spec and n.
pub fn parse_profile_arg(arg: &str) -> CliResult<VarianceProfile> {
    let (spec, n) = arg
        .rsplit_once(",n=")
        .ok_or_else(|| CliError::Input(format!("profile `{arg}` must end with `,n=<count>`")))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("cannot parse n from `{n}`")))?;
    let spec: ProfileSpec = spec.parse()?;
    Ok(materialize_profile(&spec, n)?)
}

/// One positive σ per line; an optional non-numeric first line is a header.
pub fn read_sigmas(path: &Path) -> CliResult<VarianceProfile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut sigmas = Vec::new();
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(s) if s.is_finite() && s > 0.0 => sigmas.push(s),
            Err(_) if !seen_data && sigmas.is_empty() => {}
            _ => {
                return Err(CliError::Input(format!(
                    "{}: line {}: `{line}` is not a positive number",
                    path.display(),
                    i + 1
                )))
            }
        }
        seen_data = true;
    }
    Ok(VarianceProfile::new(sigmas)?)
}

pub struct BoundsArgs<'a> {
    pub sigmas: Option<&'a Path>,
    pub profile: Option<&'a str>,
    pub delta: f64,
    pub beta: Option<f64>,
    pub family: Family,
}

pub fn run(args: &BoundsArgs, as_json: bool) -> CliResult<()> {
    let profile = match (args.sigmas, args.profile) {
        (Some(path), None) => read_sigmas(path)?,
        (None, Some(spec)) => parse_profile_arg(spec)?,
        _ => {
            return Err(CliError::Input(
                "give exactly one of --sigmas or --profile".into(),
            ))
        }
    };
    let reports = family_bound_reports(args.family, &profile, args.delta, args.beta)?;

    if as_json {
        println!(
            "{}",
            serde_json::to_string(&reports).expect("reports serialize")
        );
        return Ok(());
    }
    let manifest = RunManifest::start(
        "bounds",
        json!({
            "sigmas": args.sigmas.map(|p| p.display().to_string()),
            "profile": args.profile,
            "n": profile.len(),
            "delta": args.delta,
            "beta": args.beta,
            "family": args.family,
        }),
        None,
    )
    .finish();
    println!("# manifest {}", manifest.to_json());
    println!(
        "{:<18} {:>14} {:>6} {:>10}  note",
        "bound", "value", "trim", "applicable"
    );
    for r in &reports {
        let value = r
            .value
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "{:<18} {:>14} {:>6} {:>10}  {}",
            r.bound_name.as_str(),
            value,
            r.trim_index,
            r.applicable,
            r.applicability_note
        );
    }
    Ok(())
}
