use std::path::PathBuf;
use std::process::{Command, Output};

use autoweight_core::automaton::{isomorphic, minimize, parse_automaton};
use autoweight_core::builtins;
use serde_json::Value as Json;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autoweight"))
        .args(args)
        .env_remove("AUTOWEIGHT_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Json {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn shipped_thue_morse_eval_three() {
    let r = json(&["eval", &data("thue-morse.aut"), "--n", "3"]);
    assert_eq!(r["value"], "1");
}

#[test]
fn eval_matches_digit_parity() {
    let r = json(&["eval", &data("thue-morse.aut"), "--n", "0", "--count", "2^10"]);
    let rows = r["values"].as_array().unwrap();
    assert_eq!(rows.len(), 1024);
    for row in rows {
        let n = row[0].as_u64().unwrap();
        let want = if n.count_ones() % 2 == 0 { "1" } else { "-1" };
        assert_eq!(row[1], want, "n = {n}");
    }
}

#[test]
fn missing_initial_eval_fails_analyze_succeeds() {
    let out = run(&["eval", &data("missing-initial.aut"), "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("incomplete automaton"));

    let r = json(&["analyze", &data("missing-initial.aut")]);
    assert_eq!(r["complete"], false);
    assert_eq!(r["strongly_connected"], true);
    assert_eq!(r["terminal"][0]["cycle_gcd"], 1);
}

#[test]
fn malformed_line_is_named() {
    let out = run(&["eval", &data("malformed.aut")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 7"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "thue-morse", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["sum", "thue-morse", "--N", "8"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "thue-morse", "--n", "two"]).status.code(), Some(2));
}

#[test]
fn unknown_input_is_domain_error() {
    let out = run(&["eval", "no-such-sequence"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: "));
}

#[test]
fn config_is_echoed() {
    let r = json(&["--seed", "7", "sum", "thue-morse", "--phase", "golden", "--N", "2^10"]);
    let c = &r["config"];
    assert_eq!(c["verb"], "sum");
    assert_eq!(c["seed"], "7");
    assert_eq!(c["N"], "2^10");
    assert_eq!(c["method"], "auto");
    assert_eq!(r["N"], 1024);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["--seed", "3", "sup", "thue-morse", "--N", "2^10", "--degree", "2", "--all"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_cap_does_not_change_results() {
    let strip = |mut j: Json| {
        j.as_object_mut().unwrap().remove("config");
        j
    };
    let a = strip(json(&["--threads", "1", "sup", "thue-morse", "--N", "2^10", "--degree", "2"]));
    let b = strip(json(&["--threads", "3", "sup", "thue-morse", "--N", "2^10", "--degree", "2"]));
    assert_eq!(a, b);
}

#[test]
fn builtin_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in builtins::NAMES {
        let path = dir.path().join(format!("{name}.aut"));
        let p = path.to_string_lossy();
        let out = run(&["builtin", name, "-o", &p]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        let parsed = parse_automaton(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let orig = builtins::by_name(name).unwrap();
        let (x, y) = (minimize(&parsed).unwrap(), minimize(orig.automaton()).unwrap());
        assert!(isomorphic(&x, &y), "{name}");
    }
}

#[test]
fn analyze_thue_morse() {
    let r = json(&["analyze", &data("thue-morse.aut")]);
    assert_eq!(r["terminal"][0]["cycle_gcd"], 1);
    assert_eq!(r["aperiodic_sufficient_test"], true);
    assert_eq!(r["invertible"], true);
    assert_eq!(r["balanced"], true);
    assert_eq!(r["totally_balanced"]["holds"], true);
    assert_eq!(r["totally_balanced"]["q_bound"], 12);
}

#[test]
fn analyze_alternating_witness() {
    let r = json(&["analyze", "alternating"]);
    assert_eq!(r["balanced"], true);
    assert_eq!(r["totally_balanced"]["holds"], false);
    assert_eq!(r["totally_balanced"]["witness"], serde_json::json!([2, 0]));
}

#[test]
fn sup_thue_morse_2_12() {
    let r = json(&["sup", &data("thue-morse.aut"), "--N", "2^12", "--err", "1e-4"]);
    let v = r["value"].as_f64().unwrap();
    let err = r["err"].as_f64().unwrap();
    assert!(err <= 1e-4);
    // the product at alpha = 1/3 equals (sqrt 3 / 2)^12
    let third = 0.75f64.powi(6);
    assert!(v + err >= third, "{v}");
    assert!(v <= 2.0 * third, "{v}");
}

#[test]
fn sum_methods_agree() {
    let mut vals = Vec::new();
    for m in ["direct", "interval", "transfer"] {
        let r = json(&["sum", "rudin-shapiro", "--phase", "lin:sqrt2", "--N", "2^12", "--method", m]);
        assert_eq!(r["method"], m);
        vals.push((r["re"].as_f64().unwrap(), r["im"].as_f64().unwrap()));
    }
    for w in vals.windows(2) {
        assert!((w[0].0 - w[1].0).abs() < 1e-9 && (w[0].1 - w[1].1).abs() < 1e-9);
    }
}

#[test]
fn transfer_needs_power_of_base() {
    let out = run(&["sum", "thue-morse", "--phase", "0.3", "--N", "1000", "--method", "transfer"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn restrict_writes_parseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.aut");
    let out = run(&["restrict", "thue-morse", "--q", "3", "--r", "1", "-o", &path.to_string_lossy()]);
    assert!(out.status.success());
    let a = parse_automaton(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let tm = builtins::thue_morse();
    for n in 0..2000u64 {
        assert_eq!(a.eval(n).unwrap(), tm.eval(3 * n + 1));
    }
}

#[test]
fn decompose_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let r = json(&["decompose", "gtm3", "--kind", "invertible", "-o", &d]);
    assert_eq!(r["period"], 2);
    assert!(dir.path().join("bal.aut").exists());

    let out = run(&["decompose", "nu2-parity", "--kind", "invertible"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("need not admit a decomposition"));

    let r = json(&["decompose", "mod3-tracker", "--kind", "aperiodic", "-o", &d]);
    let q = r["q"].as_u64().unwrap();
    assert_eq!(q % 3, 0);
    assert!(dir.path().join("part-0.aut").exists());
}

#[test]
fn ergodic_counterexample_runs() {
    let r = json(&["ergodic", "--counterexample", "--n-max", "2^16"]);
    assert_eq!(r["closed_form_holds"], true);
    assert_eq!(r["halving_holds"], true);
    assert_eq!(r["coboundary_holds"], true);
}

#[test]
fn builtin_list() {
    let r = json(&["builtin", "--list"]);
    assert_eq!(r["builtins"].as_array().unwrap().len(), builtins::NAMES.len());
}
