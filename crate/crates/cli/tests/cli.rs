use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Runs the binary inside a fresh scratch directory so that stray file
/// writes would be visible.
fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coherlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn coherlab")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coherlab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    run_in(&std::env::temp_dir(), args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn bell_qire_is_one_bit() {
    let out = run(&["measure", "qire", "--builtin", "bell"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["method"], "closed-form");
}

#[test]
fn merging_values_depend_on_the_cut() {
    let r_ab = json(&run(&["measure", "qire", "--builtin", "merging", "--split", "A=0;B=1,2"]));
    let rb_a = json(&run(&["measure", "qire", "--builtin", "merging", "--split", "A=0,2;B=1"]));
    assert!((r_ab["value"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-9);
    assert!((rb_a["value"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-9);
}

#[test]
fn csv_has_the_fixed_header() {
    let out = run(&["measure", "cr", "--builtin", "psi2", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,value,expected,tolerance,status"));
    assert!(lines.next().unwrap().starts_with("cr,"));
}

#[test]
fn shipped_domino_channel_classifies_as_si_and_sqi() {
    let path = data("domino.json");
    let out = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["separable", "si", "sqi"] {
        assert_eq!(v[key], true, "{key}: {v}");
    }
}

#[test]
fn reproduce_passes_every_row() {
    let out = run(&["reproduce", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",pass")), "{text}");
}

#[test]
fn failed_checks_exit_with_four() {
    // With zero tolerance the floating-point value 4/9 no longer matches.
    let out = run(&["protocol", "merge-witness", "--tol", "0", "--format", "csv"]);
    assert!(stdout(&out).lines().any(|l| l.ends_with(",fail")), "{}", stdout(&out));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = scratch("parse");
    std::fs::write(dir.join("broken.json"), "{\"dims\": [2], ").unwrap();
    for args in [
        vec!["measure", "cr", "--state", "broken.json"],
        vec!["measure", "cr", "--state", "missing.json"],
        vec!["measure", "nonsense", "--builtin", "bell"],
        vec!["measure", "cr", "--builtin", "domino:12"],
        vec!["measure", "qire", "--builtin", "merging"],
        vec!["measure", "qire", "--builtin", "merging", "--split", "A=0;B=0"],
        vec!["protocol", "bogus"],
        vec!["suite", "bogus"],
        vec!["frobnicate"],
        vec!["measure", "cr", "--builtin", "bell", "--format", "xml"],
    ] {
        let out = run_in(&dir, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn invariant_violations_exit_with_three() {
    let dir = scratch("invariant");
    let cases = [
        r#"{"dims":[2],"kind":"density","matrix":[[1,0],[1,0],[0,0],[0,0]]}"#,
        r#"{"dims":[2],"kind":"density","matrix":[[2,0],[0,0],[0,0],[-1,0]]}"#,
        r#"{"dims":[2],"kind":"pure","matrix":[[1,0]]}"#,
        r#"{"dims":[0],"kind":"pure","matrix":[]}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let name = format!("s{i}.json");
        std::fs::write(dir.join(&name), text).unwrap();
        let out = run_in(&dir, &["measure", "cr", "--state", &name]);
        assert_eq!(out.status.code(), Some(3), "{text}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_input_never_panics() {
    let dir = scratch("fuzz");
    let inputs = [
        "", "null", "[]", "{}", "{\"dims\":", "{\"dims\":[2],\"kind\":\"pure\",\"matrix\":[[1e999,0],[0,0]]}",
        "{\"dims\":[18446744073709551615,2],\"kind\":\"pure\",\"matrix\":[]}",
        "{\"dims\":[2],\"kind\":\"pure\",\"matrix\":[[0,0],[0,0]]}",
        "{\"kind\":\"product\",\"in_dims\":[[2],[2]],\"out_dims\":[[2],[2]],\"ops\":[{\"a\":[],\"b\":[]}]}",
        "{\"kind\":\"kraus\",\"in_dims\":[2],\"out_dims\":[2],\"ops\":[]}",
        "\u{0}\u{1}garbage",
    ];
    for (i, text) in inputs.iter().enumerate() {
        let name = format!("f{i}.json");
        std::fs::write(dir.join(&name), text).unwrap();
        for args in [
            vec!["measure", "qire", "--state", &name],
            vec!["classify", &name],
            vec!["protocol", "sqi-to-si", "--channel", &name, "--trials", "2"],
        ] {
            let out = run_in(&dir, &args);
            let code = out.status.code();
            assert!(matches!(code, Some(2) | Some(3)), "{args:?} on {text:?}: {code:?}");
            assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
        }
    }
}

#[test]
fn files_are_written_only_with_out() {
    let dir = scratch("out");
    let out = run_in(&dir, &["measure", "entropy", "--builtin", "merging"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 0);

    let out = run_in(&dir, &["measure", "entropy", "--builtin", "merging", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(written["name"], "entropy");
}

#[test]
fn suites_report_failure_seeds() {
    let out = run(&["suite", "teleport", "--trials", "5", "--seed", "40", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["seed"], 40);
    assert_eq!(v["properties"][0]["passed"], 5);
    assert_eq!(v["properties"][0]["failure_seeds"].as_array().unwrap().len(), 0);
}

#[test]
fn protocols_run_on_their_defaults() {
    for name in ["teleport", "distill-mc", "steer", "discriminate", "merge-witness"] {
        let out = run(&["protocol", name, "--trials", "5"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert_eq!(json(&out)["protocol"], name);
    }
}

#[test]
fn teleporting_a_state_file_reports_outcomes() {
    let dir = scratch("teleport");
    std::fs::write(
        dir.join("q.json"),
        r#"{"dims":[2],"kind":"pure","matrix":[[0.6,0],[0,0.8]]}"#,
    )
    .unwrap();
    let out = run_in(&dir, &["protocol", "teleport", "--state", "q.json", "--input", "state"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let outcomes = v["outcomes"].as_array().unwrap();
    assert_eq!(outcomes.len(), 4);
    for o in outcomes {
        assert!((o["probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
}
