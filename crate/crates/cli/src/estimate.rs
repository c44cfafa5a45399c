use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use hetmed::Dataset;
use serde_json::json;
use std::fs::File;
use std::path::Path;

/// Reads a `value` or `value,sigma` CSV with `#` comment lines.
pub fn read_observations(path: &Path) -> CliResult<(Vec<f64>, Option<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect::<Vec<_>>();
    let with_sigma = match headers.as_slice() {
        [v] if v == "value" => false,
        [v, s] if v == "value" && s == "sigma" => true,
        _ => {
            return Err(CliError::Input(format!(
                "{}: header must be `value` or `value,sigma`, found `{}`",
                path.display(),
                headers.join(",")
            )))
        }
    };

    let mut values = Vec::new();
    let mut sigmas = with_sigma.then(Vec::new);
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |i: usize, name: &str| -> CliResult<f64> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::Input(format!(
                        "{}: row {row}: {name} `{raw}` is not a finite number",
                        path.display()
                    ))
                })
        };
        values.push(field(0, "value")?);
        if let Some(s) = sigmas.as_mut() {
            let sigma = field(1, "sigma")?;
            if sigma <= 0.0 {
                return Err(CliError::Input(format!(
                    "{}: row {row}: sigma must be positive, got {sigma}",
                    path.display()
                )));
            }
            s.push(sigma);
        }
    }
    if values.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no observations",
            path.display()
        )));
    }
    Ok((values, sigmas))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let row = e
        .position()
        .map(|p| format!("line {}: ", p.line()))
        .unwrap_or_default();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        kind => CliError::Input(format!("{}: {row}{kind:?}", path.display())),
    }
}

pub fn run(input: &Path, require_mle: bool, as_json: bool) -> CliResult<()> {
    let manifest = RunManifest::start(
        "estimate",
        json!({ "input": input.display().to_string(), "mle": require_mle }),
        None,
    );
    let (values, sigmas) = read_observations(input)?;
    if require_mle && sigmas.is_none() {
        return Err(CliError::MissingData(format!(
            "{}: --mle needs a sigma column",
            input.display()
        )));
    }
    let data = match sigmas {
        Some(s) => Dataset::with_scales(values, s)?,
        None => Dataset::new(values)?,
    };
    let (mean, median, mle) = (data.mean(), data.median(), data.mle());
    let manifest = manifest.finish();

    if as_json {
        let out = json!({
            "mean": mean,
            "median": median,
            "mle": mle,
            "n": data.len(),
            "manifest": manifest,
        });
        println!("{out}");
    } else {
        println!("n       {}", data.len());
        println!("mean    {mean}");
        println!("median  {median}");
        if let Some(m) = mle {
            println!("mle     {m}  (oracle: uses the supplied sigmas)");
        }
    }
    Ok(())
}
