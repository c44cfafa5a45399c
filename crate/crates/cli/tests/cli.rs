use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn hetmed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetmed"))
        .args(args)
        .env_remove("HETMED_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON on stdout")
}

#[test]
fn estimate_examples() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "value\n1\n2\n3\n");
    let out = hetmed(&["estimate", &a, "--json"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["median"], 2.0);
    assert_eq!(v["mean"], 2.0);
    assert_eq!(v["n"], 3);
    assert!(v["mle"].is_null());
    assert_eq!(v["manifest"]["command"], "estimate");

    let b = write(&dir, "b.csv", "# two points\nvalue,sigma\n0,1\n4,2\n");
    let v = json_of(&hetmed(&["estimate", &b, "--mle", "--json"]));
    assert!((v["mle"].as_f64().unwrap() - 0.8).abs() < 1e-15);

    let c = write(&dir, "c.csv", "value\n1\n2\n3\n4\n");
    let out = hetmed(&["estimate", &c]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("median  3"));
}

#[test]
fn estimate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&hetmed(&["estimate", missing.to_str().unwrap()])), 2);

    let bad = write(&dir, "bad.csv", "value\n1\n2\nthree\n");
    let out = hetmed(&["estimate", &bad]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));

    let ragged = write(&dir, "ragged.csv", "value,sigma\n1,1\n2\n");
    assert_eq!(code(&hetmed(&["estimate", &ragged])), 3);
    let header = write(&dir, "header.csv", "x\n1\n");
    assert_eq!(code(&hetmed(&["estimate", &header])), 3);
    let neg = write(&dir, "neg.csv", "value,sigma\n1,-1\n");
    assert_eq!(code(&hetmed(&["estimate", &neg])), 3);

    let plain = write(&dir, "plain.csv", "value\n1\n");
    assert_eq!(code(&hetmed(&["estimate", &plain, "--mle"])), 4);
}

fn bound_row<'a>(rows: &'a Value, name: &str) -> &'a Value {
    rows.as_array()
        .unwrap()
        .iter()
        .find(|r| r["bound_name"] == name)
        .unwrap_or_else(|| panic!("row {name}"))
}

#[test]
fn bounds_examples() {
    let out = hetmed(&[
        "bounds",
        "--profile",
        "constant:1,n=1000",
        "--delta",
        "0.1",
        "--family",
        "gaussian",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let rows = json_of(&out);
    let cor1 = bound_row(&rows, "median_cor1");
    let value = cor1["value"].as_f64().unwrap();
    // 0.18599 is quoted from the rounded coefficient 2.92244; mpmath gives 0.18598384634474410
    assert!((value - 0.18599).abs() < 1e-5);
    assert!((value - 0.1859838463447441).abs() < 1e-12);
    assert_eq!(cor1["trim_index"], 140);
    assert_eq!(bound_row(&rows, "devroye_eq4")["applicable"], false);
    assert!(bound_row(&rows, "devroye_eq4")["applicability_note"]
        .as_str()
        .unwrap()
        .contains("beta not supplied"));

    let rows = json_of(&hetmed(&[
        "bounds",
        "--profile",
        "constant:1,n=100",
        "--delta",
        "1e-9",
        "--json",
    ]));
    assert_eq!(bound_row(&rows, "median_lower_thm2")["applicable"], false);

    let rows = json_of(&hetmed(&[
        "bounds",
        "--profile",
        "constant:1,n=10000",
        "--delta",
        "0.1",
        "--beta",
        "1",
        "--json",
    ]));
    let dev = bound_row(&rows, "devroye_eq4");
    assert!(dev["value"].as_f64().is_some());
    assert_eq!(rows.as_array().unwrap().len(), 7);
}

#[test]
fn bounds_inputs() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "s.csv", "sigma\n4\n1\n2\n");
    let rows = json_of(&hetmed(&[
        "bounds", "--sigmas", &sig, "--delta", "0.1", "--json",
    ]));
    let mean = bound_row(&rows, "mean_eq1")["value"].as_f64().unwrap();
    let want = (2.0 * 21.0 * (10f64).ln()).sqrt() / 3.0;
    assert!((mean - want).abs() < 1e-14);

    assert_eq!(
        code(&hetmed(&[
            "bounds",
            "--profile",
            "wiggly:1,n=3",
            "--delta",
            "0.1"
        ])),
        3
    );
    assert_eq!(
        code(&hetmed(&[
            "bounds",
            "--profile",
            "constant:1",
            "--delta",
            "0.1"
        ])),
        3
    );
    assert_eq!(
        code(&hetmed(&[
            "bounds",
            "--profile",
            "constant:-1,n=3",
            "--delta",
            "0.1"
        ])),
        3
    );
    assert_eq!(
        code(&hetmed(&[
            "bounds",
            "--profile",
            "constant:1,n=3",
            "--delta",
            "1.5"
        ])),
        3
    );
    assert_eq!(code(&hetmed(&["bounds", "--delta", "0.1"])), 3);

    let cauchy = json_of(&hetmed(&[
        "bounds",
        "--profile",
        "constant:1,n=1001",
        "--delta",
        "0.1",
        "--family",
        "cauchy",
        "--json",
    ]));
    assert_eq!(bound_row(&cauchy, "mean_eq1")["applicable"], false);
    assert_eq!(bound_row(&cauchy, "median_thm1")["applicable"], true);
}

fn config(n: usize, trials: u64, deltas: &str) -> String {
    format!(
        r#"{{"family":"gaussian","profile_spec":"constant:1","n":{n},"theta":0,"deltas":{deltas},"trials":{trials},"seed":1}}"#
    )
}

fn read_without_manifest(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# manifest {"));
    text.lines().skip(1).collect::<Vec<_>>().join("\n")
}

#[test]
fn simulate_writes_artifacts_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", &config(101, 400, "[0.05, 0.1]"));
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    let r1 = hetmed(&["simulate", &cfg, "--out", out1.to_str().unwrap()]);
    assert_eq!(code(&r1), 0, "{}", String::from_utf8_lossy(&r1.stderr));
    let r2 = hetmed(&[
        "--threads",
        "2",
        "simulate",
        &cfg,
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(code(&r2), 0);

    for file in ["coverage.csv", "quantiles.csv"] {
        assert_eq!(
            read_without_manifest(&out1.join(file)),
            read_without_manifest(&out2.join(file))
        );
    }
    let coverage = read_without_manifest(&out1.join("coverage.csv"));
    assert!(coverage.starts_with(
        "bound_name,delta,bound_value,trials,exceedances,empirical,ci_low,ci_high,verdict"
    ));
    assert_eq!(coverage.lines().count(), 1 + 2 * 7);
    let quantiles = read_without_manifest(&out1.join("quantiles.csv"));
    assert!(quantiles.starts_with("estimator,q50,q90,q99\nmean,"));
    assert!(quantiles.contains("\nmle_oracle,"));

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out1.join("manifest.json")).unwrap()).unwrap();
    for key in [
        "command",
        "config",
        "seed",
        "artifact_version",
        "started",
        "finished",
    ] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(manifest["config"]["theta"], 0.0);
    assert_eq!(manifest["seed"], 1);
}

#[test]
fn simulate_strict_schema_lists_every_unknown_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"family":"gaussian","profile_spec":"constant:1","n":11,"deltas":[0.1],"trials":3,"seed":1,"sead":2,"trails":4}"#,
    );
    let out = hetmed(&["simulate", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sead") && err.contains("trails"), "{err}");

    let invalid = write(&dir, "inv.json", &config(11, 0, "[0.1]"));
    assert_eq!(code(&hetmed(&["simulate", &invalid])), 3);
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&hetmed(&["simulate", missing.to_str().unwrap()])), 2);
}

#[test]
fn simulate_single_trial_is_consistent() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", &config(11, 1, "[0.1]"));
    let out = hetmed(&["simulate", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let coverage = read_without_manifest(&dir.path().join("coverage.csv"));
    assert!(!coverage.contains("violated"));
}

#[test]
fn simulate_gaussian_coverage_example() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", &config(1001, 20_000, "[0.1]"));
    let out = hetmed(&[
        "--json",
        "simulate",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    let rows = v["report"]["coverage"]["rows"].as_array().unwrap();
    let row = |name: &str| rows.iter().find(|r| r["bound_name"] == name).unwrap();
    assert_eq!(row("median_cor1")["exceedances"], 0);
    let freq = row("median_lower_thm2")["empirical"].as_f64().unwrap();
    assert!(freq > 0.8, "{freq}");
}

#[test]
fn verify_lemma1_example() {
    let out = hetmed(&[
        "verify",
        "lemma1",
        "--n-list",
        "20,40,100",
        "--delta-list",
        "0.05,0.1,0.25",
        "--p-mode",
        "half",
    ]);
    assert_eq!(code(&out), 0);
    let out = hetmed(&["verify", "lemma1", "--n-list", "40", "--delta-list", "0.5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("report-only fails"));
    let out = hetmed(&[
        "verify", "lemma1", "--p-mode", "random", "--cases", "5", "--seed", "3",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        code(&hetmed(&[
            "verify",
            "lemma1",
            "--n-list",
            "5",
            "--delta-list",
            "1e-9"
        ])),
        3
    );
    assert_eq!(
        code(&hetmed(&["verify", "lemma1", "--p-mode", "sometimes"])),
        3
    );
}

#[test]
fn verify_lemma2_example() {
    let out = hetmed(&[
        "verify", "lemma2", "--cases", "100000", "--max-n", "31", "--seed", "7",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0 disagreements"));
    assert_eq!(code(&hetmed(&["verify", "lemma2", "--max-n", "abc"])), 3);
}

#[test]
fn verify_cor2_passes() {
    let out = hetmed(&["verify", "cor2", "--grid", "1000", "--seed", "7", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["passed"], true);
}

#[test]
fn verify_dominance_example() {
    let out = hetmed(&[
        "verify",
        "dominance",
        "--cases",
        "10000",
        "--max-n",
        "2000",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn argument_errors_exit_3_and_help_exits_0() {
    assert_eq!(code(&hetmed(&["frobnicate"])), 3);
    assert_eq!(
        code(&hetmed(&[
            "--threads",
            "0",
            "verify",
            "cor2",
            "--cases",
            "1"
        ])),
        3
    );
    assert_eq!(code(&hetmed(&["--help"])), 0);
    assert_eq!(code(&hetmed(&["--version"])), 0);
}
