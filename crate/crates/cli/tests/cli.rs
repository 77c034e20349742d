use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/case4.csv")
}

fn evident(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evident")).args(args).output().expect("run evident")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_of(o: &Output) -> Value {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
    serde_json::from_slice(&o.stdout).expect("json report")
}

fn analyze_args<'a>(input: &'a str, reference: &'a str, alternative: &'a str) -> Vec<&'a str> {
    vec!["analyze", "--input", input, "--response", "y", "--reference", reference, "--alternative", alternative]
}

fn object_keys(v: &Value, keys: &[&str], what: &str) {
    let obj = v.as_object().unwrap_or_else(|| panic!("{what} is not an object: {v}"));
    for k in keys {
        assert!(obj.contains_key(*k), "{what} lacks `{k}`: {v}");
    }
}

fn numbers(v: &Value, keys: &[&str], what: &str) {
    object_keys(v, keys, what);
    for k in keys {
        assert!(v[*k].is_number(), "{what}.{k} is not a number: {}", v[*k]);
    }
}

/// Structural check of a report against the documented schema.
fn check_schema(report: &Value) {
    object_keys(report, &["schema_version", "tool", "command", "config", "warnings", "result"], "report");
    assert_eq!(report["schema_version"], 1);
    assert!(report["warnings"].is_array());
    let command = report["command"].as_str().unwrap();
    assert_eq!(report["config"]["command"], command);
    assert!(report["config"]["seed"].is_u64(), "config must embed the seed");
    let r = &report["result"];
    match command {
        "analyze" => {
            numbers(r, &["n", "penalty_term", "observed_evidence"], "analyze");
            object_keys(r, &["reference", "alternative", "penalty", "observed_category", "kinds"], "analyze");
            for k in r["kinds"].as_array().unwrap() {
                numbers(k, &["point", "replicates", "rejected"], "kind");
                object_keys(k, &["kind", "evidence_category", "point_mass", "intervals"], "kind");
                for iv in k["intervals"].as_array().unwrap() {
                    numbers(iv, &["level", "lower", "upper", "length"], "interval");
                    assert!(iv["security_category"].is_string());
                }
            }
        }
        "simulate" => {
            for c in r["cases"].as_array().unwrap() {
                object_keys(&c["case"], &["case_id", "slopes", "reference", "alternative"], "case");
                numbers(&c["coverage"], &["global_target", "rejected", "trials", "replicates"], "coverage");
                for row in c["coverage"]["rows"].as_array().unwrap() {
                    numbers(row, &["level", "coverage", "se", "mean_length", "sd_length"], "coverage row");
                    assert!(row["kind"] == "global" || row["kind"] == "local");
                }
            }
        }
        "ratio-sweep" => {
            numbers(r, &["level"], "ratio-sweep");
            for row in r["rows"].as_array().unwrap() {
                numbers(row, &["n", "median", "q25", "q75"], "ratio row");
                assert!(row["ratios"].is_array());
            }
        }
        "security" => {
            for p in r["presets"].as_array().unwrap() {
                numbers(&p["table"], &["true_sign", "divergence_difference"], "security table");
                for row in p["table"]["rows"].as_array().unwrap() {
                    numbers(row, &["trials", "reliability"], "security row");
                    assert!(row["proportions"].is_object());
                }
            }
        }
        "lp" => {
            numbers(r, &["estimate", "capture_prob"], "lp");
            for s in r["schemes"].as_array().unwrap() {
                numbers(s, &["estimates", "discarded", "mean"], "scheme");
                for iv in s["intervals"].as_array().unwrap() {
                    numbers(iv, &["level", "lower", "upper", "length"], "lp interval");
                }
            }
        }
        "profile" => {
            numbers(r, &["estimate", "se"], "profile");
            for row in r["rows"].as_array().unwrap() {
                numbers(row, &["gamma", "profile", "adjusted", "bias_corrected"], "profile row");
            }
        }
        other => panic!("unknown command {other}"),
    }
}

#[test]
fn every_command_matches_the_schema() {
    let input = fixture();
    let input = input.to_str().unwrap();
    let mut runs: Vec<Vec<&str>> = vec![
        [analyze_args(input, "x1,x2", "x2,x3"), vec!["--B", "200", "--level", "0.95", "--level", "0.8"]].concat(),
        [analyze_args(input, "x1", "x2"), vec!["--B", "200", "--mode", "local"]].concat(),
        vec!["simulate", "--case", "4", "--case", "1", "--trials", "5", "--B", "100"],
        vec!["ratio-sweep", "--n", "30", "--n", "60", "--trials", "5", "--B", "100"],
        vec!["security", "--preset", "A", "--trials", "5", "--B", "100"],
        vec!["lp", "--m", "221", "--n2", "131", "--x", "116", "--B", "500"],
        vec!["profile", "--family", "normal", "--input", input, "--response", "y", "--points", "3", "--B", "50"],
    ];
    runs.push(vec![
        "profile", "--family", "regression", "--input", input, "--response", "y", "--covariates", "x1,x2", "--target",
        "x2", "--gamma", "0.1", "--gamma", "0.3", "--B", "50",
    ]);
    for args in runs {
        let report = json_of(&evident(&args));
        check_schema(&report);
        assert_eq!(report["command"], args[0]);
    }
}

#[test]
fn csv_tables_have_documented_headers() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim.csv");
    let grid = dir.path().join("grid.csv");
    let lp = dir.path().join("lp.csv");
    let o = evident(&["simulate", "--case", "2", "--trials", "4", "--B", "100", "--csv", sim.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&sim).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "case_id,n,trials,replicates,level,kind,coverage,se,mean_length,sd_length,global_target,rejected"
    );
    // one row per case x level x kind
    assert_eq!(lines.count(), 4);

    let o = evident(&[
        "lp", "--m", "221", "--n2", "131", "--x", "116", "--B", "500", "--csv", lp.to_str().unwrap(), "--grid-csv",
        grid.to_str().unwrap(), "-o", dir.path().join("lp.json").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert_eq!(text.lines().next().unwrap(), "scheme,level,lower,upper,point,length");
    assert_eq!(text.lines().count(), 4);
    let text = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(text.lines().next().unwrap(), "scheme,x,density,cdf");
    assert_eq!(text.lines().count(), 1 + 3 * 512);
}

#[test]
fn replay_reproduces_the_report_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let input = fixture();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let mut args = analyze_args(input.to_str().unwrap(), "x1,x2", "x2,x3");
    args.extend(["--B", "300", "--seed", "99", "--level", "0.9", "-o", first.to_str().unwrap()]);
    assert!(evident(&args).status.success());
    let o = evident(&["replay", "--config", first.to_str().unwrap(), "-o", second.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    let first = dir.path().join("sim1.json");
    let second = dir.path().join("sim2.json");
    let o = evident(&["simulate", "--case", "9", "--trials", "6", "--B", "100", "--seed", "5", "-o", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = evident(&["--threads", "1", "replay", "--config", first.to_str().unwrap(), "-o", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn thread_cap_does_not_change_results() {
    let input = fixture();
    let mut base = analyze_args(input.to_str().unwrap(), "x1,x2", "x2,x3");
    base.extend(["--B", "400"]);
    let one = evident(&[&["--threads", "1"], base.as_slice()].concat());
    let four = evident(&[base.as_slice(), &["--threads", "4"]].concat());
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn missing_response_column_is_named() {
    let input = fixture();
    let mut args = analyze_args(input.to_str().unwrap(), "x1", "x2");
    args[4] = "weight";
    let o = evident(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`weight`"), "{}", stderr(&o));

    let o = evident(&analyze_args(input.to_str().unwrap(), "x1,x7", "x2"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`x7`"), "{}", stderr(&o));
}

#[test]
fn unknown_case_is_a_config_error() {
    let o = evident(&["simulate", "--case", "15"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("case must be 1..14"), "{}", stderr(&o));
}

#[test]
fn bad_options_are_config_errors() {
    let input = fixture();
    let input = input.to_str().unwrap();
    for extra in [["--B", "50"], ["--level", "1.5"], ["--k-p", "9"]] {
        let o = evident(&[analyze_args(input, "x1", "x2"), extra.to_vec()].concat());
        assert_eq!(o.status.code(), Some(2), "{extra:?}: {}", stderr(&o));
    }
    let o = evident(&["lp", "--m", "10", "--n2", "10", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = evident(&["analyze", "--input", "/nonexistent.csv", "--response", "y", "--reference", "a", "--alternative", "b"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_specifications_give_zero_with_a_warning() {
    let input = fixture();
    let mut args = analyze_args(input.to_str().unwrap(), "x1,x2", "x2,x1");
    args.extend(["--B", "200"]);
    let o = evident(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    let report = json_of(&o);
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(report["result"]["observed_evidence"], 0.0);
    for k in report["result"]["kinds"].as_array().unwrap() {
        assert_eq!(k["point"], 0.0);
        assert_eq!(k["evidence_category"], "Weak");
        for iv in k["intervals"].as_array().unwrap() {
            assert_eq!((iv["lower"].as_f64(), iv["upper"].as_f64()), (Some(0.0), Some(0.0)));
            assert_eq!(iv["security_category"], "WI");
        }
    }
}

#[test]
fn lincoln_petersen_point_estimate() {
    let report = json_of(&evident(&["lp", "--m", "221", "--n2", "131", "--x", "116", "--B", "10000"]));
    assert_eq!(report["result"]["estimate"], 249);
    assert!((report["result"]["capture_prob"].as_f64().unwrap() - 0.5261044).abs() < 5e-7);
    let widths: Vec<f64> = report["result"]["schemes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["intervals"][0]["length"].as_f64().unwrap())
        .collect();
    assert!(widths[0] < widths[1] && widths[1] < widths[2], "{widths:?}");
}

#[test]
fn fixture_local_interval_is_shorter_than_global() {
    let input = fixture();
    let mut args = analyze_args(input.to_str().unwrap(), "x1,x2", "x2,x3");
    args.extend(["--B", "2000", "--seed", "11"]);
    let report = json_of(&evident(&args));
    let kinds = report["result"]["kinds"].as_array().unwrap();
    let length = |i: usize| kinds[i]["intervals"][0]["length"].as_f64().unwrap();
    assert_eq!(kinds[0]["kind"], "global");
    assert_eq!(kinds[1]["kind"], "local");
    assert!(length(1) < length(0), "local {} global {}", length(1), length(0));
}

#[test]
fn rank_deficient_resamples_are_a_statistical_failure() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("spike.csv");
    let mut text = String::from("y,x1,x2\n");
    for i in 0..20 {
        let spike = if i == 0 { 1.0 } else { 0.0 };
        text.push_str(&format!("{},{},{}\n", (i as f64 * 0.37).sin() + spike, spike, (i as f64).cos()));
    }
    std::fs::write(&path, text).unwrap();
    let o = evident(&[analyze_args(path.to_str().unwrap(), "x1", "x2"), vec!["--B", "200"]].concat());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("rejected"), "{}", stderr(&o));
}
