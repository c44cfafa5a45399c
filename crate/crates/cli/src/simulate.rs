use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use hetmed::simulation::ExperimentReport;
use hetmed::{run_experiment, SimulationConfig};
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Parses a config, rejecting unknown keys (all of them are listed).
pub fn load_config(path: &Path) -> CliResult<SimulationConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: invalid JSON: {e}", path.display())))?;
    let Value::Object(map) = &value else {
        return Err(CliError::Input(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    };
    let unknown: Vec<&str> = map
        .keys()
        .map(String::as_str)
        .filter(|k| !SimulationConfig::FIELDS.contains(k))
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Input(format!(
            "{}: unknown config keys: {} (allowed: {})",
            path.display(),
            unknown.join(", "),
            SimulationConfig::FIELDS.join(", ")
        )));
    }
    let config: SimulationConfig = serde_json::from_value(value)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(body.as_bytes()))
        .map_err(|e| CliError::io(path, e))
}

fn coverage_csv(report: &ExperimentReport, manifest: &RunManifest) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "bound_name",
        "delta",
        "bound_value",
        "trials",
        "exceedances",
        "empirical",
        "ci_low",
        "ci_high",
        "verdict",
    ])
    .map_err(csv_failure)?;
    for r in &report.coverage.rows {
        w.write_record([
            r.bound_name.as_str().to_string(),
            r.delta.to_string(),
            cell(r.bound_value),
            r.trials.to_string(),
            r.exceedances.map_or_else(String::new, |k| k.to_string()),
            cell(r.empirical),
            cell(r.ci.map(|c| c.low)),
            cell(r.ci.map(|c| c.high)),
            r.verdict.as_str().to_string(),
        ])
        .map_err(csv_failure)?;
    }
    finish_csv(w, manifest)
}

fn quantiles_csv(report: &ExperimentReport, manifest: &RunManifest) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["estimator", "q50", "q90", "q99"])
        .map_err(csv_failure)?;
    for q in &report.quantiles {
        w.write_record([
            q.estimator.as_str().to_string(),
            q.q50.to_string(),
            q.q90.to_string(),
            q.q99.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    finish_csv(w, manifest)
}

fn csv_failure(e: csv::Error) -> CliError {
    CliError::Input(format!("csv: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>, manifest: &RunManifest) -> CliResult<String> {
    let body = w
        .into_inner()
        .map_err(|e| CliError::Input(format!("csv: {e}")))?;
    Ok(format!(
        "# manifest {}\n{}",
        manifest.to_json(),
        String::from_utf8(body).expect("csv output is UTF-8")
    ))
}

/// Runs the experiment, writes the three artifacts and reports whether any verdict was violated.
pub fn run(config_path: &Path, out_dir: &Path, as_json: bool) -> CliResult<bool> {
    let config = load_config(config_path)?;
    let resolved = serde_json::to_value(&config).expect("config serializes");
    let manifest = RunManifest::start("simulate", resolved, Some(config.seed));
    let report = run_experiment(&config)?;
    let manifest = manifest.finish();

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_file(
        &out_dir.join("coverage.csv"),
        &coverage_csv(&report, &manifest)?,
    )?;
    write_file(
        &out_dir.join("quantiles.csv"),
        &quantiles_csv(&report, &manifest)?,
    )?;
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out_dir.join("manifest.json"), &(manifest_json + "\n"))?;

    let violated = report.coverage.any_violated();
    if as_json {
        let out = json!({ "report": report, "manifest": manifest });
        println!("{out}");
    } else {
        println!(
            "{:<18} {:>6} {:>12} {:>8} {:>10} {:>10} {:>10}  verdict",
            "bound", "delta", "value", "exceed", "empirical", "ci_low", "ci_high"
        );
        for r in &report.coverage.rows {
            let num = |x: Option<f64>, prec: usize| {
                x.map_or_else(|| "-".into(), |v| format!("{v:.prec$}"))
            };
            println!(
                "{:<18} {:>6} {:>12} {:>8} {:>10} {:>10} {:>10}  {}",
                r.bound_name.as_str(),
                r.delta,
                r.bound_value
                    .map_or_else(|| "-".into(), |v| format!("{v:.5e}")),
                r.exceedances.map_or_else(|| "-".into(), |k| k.to_string()),
                num(r.empirical, 5),
                num(r.ci.map(|c| c.low), 5),
                num(r.ci.map(|c| c.high), 5),
                r.verdict
            );
        }
        println!();
        println!(
            "{:<12} {:>12} {:>12} {:>12}",
            "estimator", "q50", "q90", "q99"
        );
        for q in &report.quantiles {
            println!(
                "{:<12} {:>12.5e} {:>12.5e} {:>12.5e}",
                q.estimator.as_str(),
                q.q50,
                q.q90,
                q.q99
            );
        }
        println!(
            "\nwrote coverage.csv, quantiles.csv, manifest.json to {}",
            out_dir.display()
        );
    }
    Ok(violated)
}
