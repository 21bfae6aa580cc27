use std::path::{Path, PathBuf};
use std::process::Command;

use choicekit::cli::{run, CliOutput};
use serde_json::{json, Value};
use tempfile::TempDir;

fn cli(args: &[&str]) -> CliOutput {
    run(std::iter::once("choicekit").chain(args.iter().copied()))
}

fn write(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scalar_menu(entries: &[(&str, f64)]) -> Value {
    json!({
        "space": {"kind": "real_scalar"},
        "actions": entries.iter().map(|(id, x)| json!({"id": id, "outcome": x})).collect::<Vec<_>>(),
    })
}

fn probit() -> Value {
    json!({"type": "iaru", "shock": {"kind": "gaussian", "param": 1.0}})
}

#[test]
fn logit_passes_default_axioms_on_generated_corpus() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "rule.json", &json!({"type": "mnl", "beta": 1.0}));
    let spec = write(
        dir.path(),
        "corpus.json",
        &json!({"space": {"kind": "real_scalar"}, "menu_count": 20, "actions_per_menu": [2, 5], "seed": 3}),
    );
    let out = cli(&["check", "--rule", s(&rule), "--corpus", s(&spec)]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("all axioms hold"));
}

#[test]
fn probit_fails_decomposability_at_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "probit.json", &probit());
    write(dir.path(), "unit.json", &scalar_menu(&[("b0", 0.0), ("b1", 1.0)]));
    let glob = dir.path().join("unit*.json");
    let out = cli(&["check", "--rule", s(&rule), "--menus", s(&glob), "--axioms", "decomposability", "--json"]);
    assert_eq!(out.code, 1, "{}", out.stderr);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    let report = &doc["axioms"][0];
    assert_eq!(report["axiom"], "decomposability");
    assert_eq!(report["witness"]["actions"][0], "(b0,b0)");
    let eps = report["min_epsilon"].as_f64().unwrap();
    assert!((eps - 0.759).abs() < 1e-3, "{eps}");
}

#[test]
fn missing_observed_probability_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let mut menu = scalar_menu(&[("b0", 0.0), ("b1", 1.0)]);
    menu["probabilities"] = json!({"b0": 1.0});
    write(dir.path(), "m.json", &menu);
    let out = cli(&["check", "--menus", s(&dir.path().join("*.json"))]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("probabilities omit action b1"), "{}", out.stderr);
}

#[test]
fn observed_probabilities_become_a_table() {
    let dir = TempDir::new().unwrap();
    let mut menu = scalar_menu(&[("b0", 0.0), ("b1", 0.0)]);
    menu["probabilities"] = json!({"b0": 0.5, "b1": 0.5});
    write(dir.path(), "m.json", &menu);
    let out = cli(&["check", "--menus", s(&dir.path().join("*.json")), "--axioms", "neutrality,positivity"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
}

#[test]
fn fit_reads_mean_std_weights() {
    let dir = TempDir::new().unwrap();
    let rule = write(
        dir.path(),
        "g.json",
        &json!({"type": "general_mnl", "utility": {"kind": "mean_stddev", "gamma1": 1.0, "gamma2": -0.5}}),
    );
    let out = cli(&["fit", "--rule", s(&rule)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("gamma1 = 1\n"), "{}", out.stdout);
    assert!(out.stdout.contains("gamma2 = -0.5\n"), "{}", out.stdout);
}

#[test]
fn fit_uniform_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "u.json", &json!({"type": "uniform"}));
    let out = cli(&["fit", "--rule", s(&rule), "--space", r#"{"kind": "real_vector", "d": 3}"#, "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    let weights = doc["utility"]["weights"].as_array().unwrap();
    assert_eq!(weights.len(), 3);
    assert!(weights.iter().all(|w| w.as_f64() == Some(0.0)));
}

#[test]
fn fit_rejects_deterministic_rule() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "i.json", &json!({"type": "mnl", "beta": "inf"}));
    let out = cli(&["fit", "--rule", s(&rule)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("rule not positive at probe"), "{}", out.stderr);
}

fn scalar_corpus(dir: &Path) -> PathBuf {
    write(
        dir,
        "corpus.json",
        &json!({"space": {"kind": "real_scalar"}, "menu_count": 15, "actions_per_menu": [2, 5], "seed": 11}),
    )
}

#[test]
fn certify_perturbed_logit_within_its_delta() {
    let dir = TempDir::new().unwrap();
    let rule = write(
        dir.path(),
        "p.json",
        &json!({"type": "perturbed", "base": {"type": "mnl", "beta": 2.0}, "delta": 0.05, "seed": 7}),
    );
    let spec = scalar_corpus(dir.path());
    let cert_path = dir.path().join("cert.json");
    let out = cli(&["certify", "--rule", s(&rule), "--corpus", s(&spec), "--out", s(&cert_path), "--max-delta", "0.05"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    assert!(cert["delta"].as_f64().unwrap() <= 0.05 + 1e-12);
    assert_eq!(cert["corpus_size"], 15);
    assert_eq!(cert["menus"][0]["menu_id"], "menu_0001");
}

#[test]
fn certify_exact_logit_with_given_utility() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "r.json", &json!({"type": "mnl", "beta": 2.0}));
    let u = write(dir.path(), "u.json", &json!({"kind": "real_scalar", "beta": 2.0}));
    let spec = scalar_corpus(dir.path());
    let out = cli(&["certify", "--rule", s(&rule), "--corpus", s(&spec), "--utility", s(&u), "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let cert: Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(cert["delta"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn certify_probit_reports_a_gap() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "probit.json", &probit());
    write(dir.path(), "m1.json", &scalar_menu(&[("b0", 0.0), ("b1", 1.0)]));
    write(dir.path(), "m2.json", &scalar_menu(&[("b00", 0.0), ("b01", 1.0), ("b10", 1.0), ("b11", 2.0)]));
    let glob = dir.path().join("m*.json");
    let out = cli(&["certify", "--rule", s(&rule), "--menus", s(&glob), "--json", "--max-delta", "0.01"]);
    assert_eq!(out.code, 1, "{}", out.stderr);
    let cert: Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(cert["delta"].as_f64().unwrap() > 0.01);
}

#[test]
fn demo_probit_numbers() {
    let out = cli(&["demo-probit"]);
    assert_eq!(out.code, 0);
    for needle in ["0.760250", "0.616675", "0.577980", "0.038695"] {
        assert!(out.stdout.contains(needle), "{needle} missing from\n{}", out.stdout);
    }
    let doc: Value = serde_json::from_str(&cli(&["demo-probit", "--json"]).stdout).unwrap();
    let margin = doc["result"]["margin"].as_f64().unwrap();
    assert!((margin - 0.038695).abs() < 1e-6);
}

#[test]
fn demo_gumbel_has_no_margin_and_wide_gaussian_shrinks_it() {
    let gumbel: Value = serde_json::from_str(&cli(&["demo-probit", "--shock", "gumbel", "--json"]).stdout).unwrap();
    assert!(gumbel["result"]["margin"].as_f64().unwrap().abs() <= 1e-8);
    let unit: Value = serde_json::from_str(&cli(&["demo-probit", "--json"]).stdout).unwrap();
    let wide: Value = serde_json::from_str(&cli(&["demo-probit", "--param", "10", "--json"]).stdout).unwrap();
    let (a, b) = (unit["result"]["margin"].as_f64().unwrap(), wide["result"]["margin"].as_f64().unwrap());
    assert!(b.abs() < a.abs(), "{b} vs {a}");
    assert_eq!(cli(&["demo-probit", "--shock", "cauchy"]).code, 2);
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "corpus.json",
        &json!({"space": {"kind": "real_scalar"}, "menu_count": 100, "actions_per_menu": [2, 5], "seed": 42}),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(cli(&["gen", "--corpus", s(&spec), "--out", s(&a)]).code, 0);
    assert_eq!(cli(&["gen", "--corpus", s(&spec), "--out", s(&b)]).code, 0);
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 100);
    assert_eq!(names[0], "menu_0001.json");
    for name in &names {
        let (x, y) = (std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
        assert_eq!(x, y);
        let doc: Value = serde_json::from_slice(&x).unwrap();
        let k = doc["actions"].as_array().unwrap().len();
        assert!((2..=5).contains(&k));
    }
    let c = dir.path().join("c");
    assert_eq!(cli(&["gen", "--corpus", s(&spec), "--out", s(&c), "--seed", "43"]).code, 0);
    assert_ne!(std::fs::read(a.join(&names[0])).unwrap(), std::fs::read(c.join(&names[0])).unwrap());
}

#[test]
fn json_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "rule.json", &json!({"type": "mnl", "beta": 0.5}));
    let spec = scalar_corpus(dir.path());
    for args in [
        vec!["check", "--rule", s(&rule), "--corpus", s(&spec), "--json"],
        vec!["upsilon", "--rule", s(&rule), "--corpus", s(&spec), "--json", "--n-max", "3"],
        vec!["fit", "--rule", s(&rule), "--json"],
    ] {
        let out = cli(&args);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
        let doc: Value = serde_json::from_str(&out.stdout).unwrap();
        let again = serde_json::to_string_pretty(&doc).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), doc);
    }
}

#[test]
fn identity_records_integer_scaling() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "rule.json", &json!({"type": "mnl", "beta": 1.0}));
    write(dir.path(), "m.json", &scalar_menu(&[("a", 0.5), ("b", 1.0 / 3.0), ("c", -1.0)]));
    let glob = dir.path().join("m.json");
    let out = cli(&["check", "--rule", s(&rule), "--menus", s(&glob), "--axioms", "identity", "--json"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["integer_scaling"], 6);
}

#[test]
fn text_report_caps_witnesses() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "probit.json", &probit());
    for i in 0..4 {
        write(dir.path(), &format!("m{i}.json"), &scalar_menu(&[("x", 0.0), ("y", 1.0 + i as f64)]));
    }
    let glob = dir.path().join("m*.json");
    let out = cli(&["check", "--rule", s(&rule), "--menus", s(&glob), "--axioms", "decomposability"]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout.matches("witness").count(), 5, "{}", out.stdout);
    assert!(out.stdout.contains("... 3 more"), "{}", out.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&["check", "--menus", "a", "--corpus", "b"]).code, 2);
    assert_eq!(cli(&["nonsense"]).code, 2);
    assert_eq!(cli(&["fit", "--rule", "/nonexistent/rule.json"]).code, 2);
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_choicekit");
    let ok = Command::new(bin).arg("demo-probit").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0.038695"));
    let bad = Command::new(bin).args(["fit", "--rule", "/nonexistent/rule.json"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
