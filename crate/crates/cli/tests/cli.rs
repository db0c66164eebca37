use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionsense"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validate(schema_file: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_dir().join(schema_file)).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:#?}");
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL: &[(&str, &[&str], &str)] = &[
    ("displacement-sweep", &["--points", "4"], "displacement_sweep.schema.json"),
    ("efield-sweep", &["--points", "3", "--nodes", "16"], "efield_sweep.schema.json"),
    ("snr", &["--points", "5"], "snr.schema.json"),
    ("renyi", &["--points", "5"], "renyi.schema.json"),
    ("wigner", &["--points", "5", "--kind", "hybrid"], "wigner.schema.json"),
];

#[test]
fn json_outputs_match_their_schemas() {
    for (cmd, extra, schema) in SMALL {
        let mut args = vec![*cmd, "--format", "json"];
        args.extend_from_slice(extra);
        let doc = json_of(&run(&args));
        validate(schema, &doc);
    }
    let doc = json_of(&run(&["displacement-sweep", "--points", "3", "--excess-noise", "1.18", "--format", "json"]));
    validate("displacement_sweep.schema.json", &doc);
    assert!(doc["rows"][0]["delta_sq_excess"].is_number());
}

#[test]
fn csv_outputs_have_one_header_line() {
    for (cmd, extra, _) in SMALL {
        let mut args = vec![*cmd];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == ','), "{header}");
        assert!(lines.all(|l| l.split(',').all(|f| f.parse::<f64>().is_ok())), "{cmd}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["efield-sweep", "--points", "4", "--format", "json"],
        vec!["displacement-sweep", "--points", "6"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"format": "json", "points": 3, "g_hz": 3910, "sigma_hz": 0, "gamma": 0}"#).unwrap();
    let out_path = dir.path().join("sweep.json");
    let out = run(&["displacement-sweep", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    validate("displacement_sweep.schema.json", &doc);
    let g = 2.0 * std::f64::consts::PI * 3910.0;
    for row in doc["rows"].as_array().unwrap() {
        let tau = row["tau_s"].as_f64().unwrap();
        let d = row["delta_sq_exact"].as_f64().unwrap();
        assert!((d * 4.0 * g * g * tau * tau - 1.0).abs() < 1e-12);
    }
}

#[test]
fn invalid_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"frequency": 3}"#).unwrap();
    for args in [
        vec!["snr", "--config", cfg.to_str().unwrap()],
        vec!["displacement-sweep", "--nbar", "-2"],
        vec!["efield-sweep", "--nodes", "1000"],
        vec!["renyi", "--tau-us", "0"],
        vec!["snr", "--no-such-flag"],
        vec!["calibrate", "sigma", "/nonexistent/data.csv"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn oracle_check_passes_and_fails_with_exit_three() {
    let ok = run(&["oracle-check", "--format", "json"]);
    let doc = json_of(&ok);
    validate("oracle_check.schema.json", &doc);
    assert_eq!(doc["pass"], Value::Bool(true));
    assert!(doc["max_rel_err"].as_f64().unwrap() < 1e-6);

    let bad = run(&["oracle-check", "--tolerance", "1e-300"]);
    assert_eq!(bad.status.code(), Some(3));
    // the report is still written
    assert!(String::from_utf8(bad.stdout).unwrap().starts_with("protocol,n_ions"));
}

#[test]
fn calibrate_sigma_from_csv() {
    let g = 2.0 * std::f64::consts::PI * 3910.0;
    let sigma = 2.0 * std::f64::consts::PI * 40.0;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x,y").unwrap();
    for i in 0..=15 {
        let tau = i as f64 * 0.2e-3;
        let y = ionsense::calibration::pup_model(tau, g, sigma, 5.0, 150, 250.0);
        writeln!(f, "{tau},{y}").unwrap();
    }
    let doc = json_of(&run(&["calibrate", "sigma", f.path().to_str().unwrap()]));
    validate("calibration_report.schema.json", &doc);
    let hz = doc["derived"][0]["value"].as_f64().unwrap();
    assert!((hz - 40.0).abs() < 0.8, "{hz}");

    let csv = run(&["calibrate", "sigma", f.path().to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("name,value,std_error\nsigma,"), "{text}");
}

#[test]
fn help_mentions_hz() {
    let out = run(&["displacement-sweep", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("--g-hz") && text.contains("in Hz"));
}
