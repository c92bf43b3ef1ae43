use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_grasslen"));
    c.env_remove("GRASSLEN_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn write_doc(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const E12_E34: &str = r#"{"m": 4, "n": 2, "field": "C", "terms": [[[1, 2], 1.0, 0.0], [[3, 4], 1.0, 0.0]]}"#;
const E123: &str = r#"{"m": 5, "n": 3, "field": "R", "terms": [[[1, 2, 3], 2.0, 0.0]]}"#;

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn help_texts_match_golden_files() {
    assert_eq!(stdout(&run(&["--help"])), golden("help.txt"));
    for c in ["bounds", "secant", "fit", "check", "schmidt", "dual", "rank"] {
        assert_eq!(stdout(&run(&[c, "--help"])), golden(&format!("help_{c}.txt")), "{c}");
    }
}

#[test]
fn every_subcommand_documents_tol_and_seed() {
    for c in ["bounds", "secant", "fit", "check", "schmidt", "dual", "rank"] {
        let h = golden(&format!("help_{c}.txt"));
        assert!(h.contains("--tol <TOL>") && h.contains("--seed <SEED>"), "{c}");
        assert!(h.contains("[default: 7454127481737209198]"), "{c}");
    }
}

#[test]
fn bounds_csv_matches_golden_and_is_reproducible() {
    let a = run(&["bounds", "--m", "4..14", "--n", "2,3,4,5"]);
    assert!(a.status.success());
    let text = stdout(&a);
    assert_eq!(text, golden("bounds_4_14.csv"));
    assert_eq!(text.lines().count(), 1 + 11 * 4);
    assert!(text.lines().any(|l| l.starts_with("8,3,3,4,") && l.contains(",5,complex,")));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let out2 = dir.path().join("b2.csv");
    for p in [&out, &out2] {
        assert!(run(&["bounds", "--m", "4..14", "--n", "2,3,4,5", "--out", p.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn bounds_plot_series() {
    let o = run(&["bounds", "--m", "6..8", "--n", "3", "--plot"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert!(t.contains("# series n=3"));
}

#[test]
fn bad_ranges_exit_two() {
    for args in [&["bounds", "--m", "9..4"][..], &["bounds", "--n", "x"], &["secant", "--m", "6"], &["nope"]] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn secant_examples() {
    let row = |args: &[&str]| -> Vec<String> {
        let o = run(args);
        assert!(o.status.success());
        stdout(&o).lines().nth(1).unwrap().split(',').map(String::from).collect()
    };
    let r = row(&["secant", "--m", "6", "--n", "3", "--l", "2"]);
    assert_eq!((r[3].as_str(), r[5].as_str()), ("19", "0"));
    let r = row(&["secant", "--m", "6", "--n", "2", "--l", "2"]);
    assert_eq!(r[5], "1");
    let r = row(&["secant", "--m", "6", "--n", "3", "--l", "1"]);
    assert_eq!(r[3], "9");
    let o = run(&["secant", "--m", "5..6", "--n", "2", "--l-max", "2", "--certify"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(t.lines().count(), 5);
    assert!(t.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn secant_cap_exits_three() {
    assert_eq!(run(&["secant", "--m", "30", "--n", "15"]).status.code(), Some(3));
    assert_eq!(run(&["secant", "--m", "20", "--n", "10"]).status.code(), Some(3));
}

#[test]
fn seed_flag_and_env_var() {
    let seed_of = |o: &Output| stdout(o).lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
    let default = run(&["secant", "--m", "5", "--n", "2"]);
    assert_eq!(seed_of(&default), "7454127481737209198");
    let env = bin().args(["secant", "--m", "5", "--n", "2"]).env("GRASSLEN_SEED", "42").output().unwrap();
    assert_eq!(seed_of(&env), "42");
    let both = bin().args(["secant", "--m", "5", "--n", "2", "--seed", "7"]).env("GRASSLEN_SEED", "42").output().unwrap();
    assert_eq!(seed_of(&both), "7");
}

#[test]
fn check_schmidt_rank_records() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(&dir, "a.json", E12_E34);
    let v = json(&run(&["check", f.to_str().unwrap()]));
    assert_eq!(v["decomposable"], false);
    assert_eq!(v["support_rank"], 4);
    let v = json(&run(&["schmidt", f.to_str().unwrap()]));
    assert_eq!(v["length"], 2);
    assert_eq!(v["terms"]["terms"].as_array().unwrap().len(), 2);
    let v = json(&run(&["rank", f.to_str().unwrap()]));
    assert_eq!(v["rank"], 4);
    let g = write_doc(&dir, "b.json", E123);
    let v = json(&run(&["check", g.to_str().unwrap()]));
    assert_eq!(v["decomposable"], true);
    assert_eq!(json(&run(&["rank", g.to_str().unwrap()]))["rank"], 3);
}

#[test]
fn schmidt_on_generic_six_dimensional_two_vector() {
    let mut terms = Vec::new();
    let mut k = 0.0f64;
    for i in 1..=6 {
        for j in i + 1..=6 {
            k += 1.0;
            terms.push(format!("[[{i}, {j}], {}, {}]", (k * 1.7).sin(), (k * 0.3).cos()));
        }
    }
    let doc = format!(r#"{{"m": 6, "n": 2, "field": "C", "terms": [{}]}}"#, terms.join(", "));
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(&dir, "g.json", &doc);
    let v = json(&run(&["schmidt", f.to_str().unwrap()]));
    assert_eq!(v["length"], 3);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn dual_twice_restores_up_to_sign() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(&dir, "b.json", E123);
    let d1 = dir.path().join("d1.json");
    let d2 = dir.path().join("d2.json");
    assert!(run(&["dual", f.to_str().unwrap(), "--out", d1.to_str().unwrap()]).status.success());
    assert!(run(&["dual", d1.to_str().unwrap(), "--out", d2.to_str().unwrap()]).status.success());
    let once: Value = serde_json::from_str(&std::fs::read_to_string(&d1).unwrap()).unwrap();
    assert_eq!(once["n"], 2);
    assert_eq!(once["terms"][0][0], serde_json::json!([4, 5]));
    let twice: Value = serde_json::from_str(&std::fs::read_to_string(&d2).unwrap()).unwrap();
    // n(m-n) = 6 is even, so the sign is +1.
    let orig: Value = serde_json::from_str(E123).unwrap();
    assert_eq!(twice["terms"], orig["terms"]);
    assert_eq!(twice["n"], 3);
}

#[test]
fn fit_records_and_terms_document() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(&dir, "a.json", E12_E34);
    let terms = dir.path().join("terms.json");
    let v = json(&run(&["fit", f.to_str().unwrap(), "--l-max", "3", "--out", terms.to_str().unwrap()]));
    assert_eq!(v["length"], 2);
    assert_eq!(v["exceeds_l_max"], false);
    assert_eq!(v["diverging"], false);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    let r1 = v["reports"][0]["best_residual"].as_f64().unwrap();
    assert!((r1 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&terms).unwrap()).unwrap();
    assert_eq!(doc["terms"].as_array().unwrap().len(), 2);
    let v = json(&run(&["fit", f.to_str().unwrap(), "--l", "1"]));
    assert_eq!(v["exact_fit"], false);
    let v = json(&run(&["fit", f.to_str().unwrap(), "--l-max", "1"]));
    assert_eq!(v["length"], Value::Null);
    assert_eq!(v["exceeds_l_max"], true);
}

#[test]
fn fit_is_deterministic_under_seed() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(&dir, "a.json", E12_E34);
    let a = run(&["fit", f.to_str().unwrap(), "--seed", "9", "--l", "2"]);
    let b = run(&["fit", f.to_str().unwrap(), "--seed", "9", "--l", "2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        "not json",
        r#"{"m": 4, "n": 2, "terms": [[[2, 1], 1.0, 0.0]]}"#,
        r#"{"m": 4, "n": 2, "terms": [[[1, 2], 1.0, 0.0], [[1, 2], 1.0, 0.0]]}"#,
        r#"{"m": 4, "n": 2, "terms": [[[1, 5], 1.0, 0.0]]}"#,
    ];
    for (i, text) in bad.iter().enumerate() {
        let f = write_doc(&dir, &format!("bad{i}.json"), text);
        for c in ["check", "schmidt", "dual", "rank", "fit"] {
            assert_eq!(run(&[c, f.to_str().unwrap()]).status.code(), Some(2), "{c} on {text}");
        }
    }
    assert_eq!(run(&["check", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
    let f = write_doc(&dir, "ok.json", E12_E34);
    assert_eq!(run(&["check", f.to_str().unwrap(), "--tol", "2"]).status.code(), Some(2));
    let g = write_doc(&dir, "g3.json", E123);
    assert_eq!(run(&["schmidt", g.to_str().unwrap()]).status.code(), Some(2));
}
