use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use siterank::io::load_dataset;
use siterank_core::model::validate_dataset;
use tempfile::TempDir;

fn siterank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siterank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = siterank(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn city(dir: &Path, seed: &str) {
    ok(&[
        "generate", "--out-dir", s(dir), "--seed", seed, "--n-venues", "600", "--width-km", "2",
        "--height-km", "2", "--chain", "Bean", "--stores", "30", "--planted", "density:1",
    ]);
}

fn data(dir: &Path) -> (String, String) {
    (
        s(&dir.join("venues.csv")).to_string(),
        s(&dir.join("checkins.csv")).to_string(),
    )
}

#[test]
fn generate_writes_a_clean_dataset() {
    let t = TempDir::new().unwrap();
    city(t.path(), "3");
    let d = load_dataset(&t.path().join("venues.csv"), &t.path().join("checkins.csv"), None)
        .unwrap();
    assert_eq!(d.venues.len(), 630);
    assert!(validate_dataset(&d).is_empty());
}

#[test]
fn generate_is_seeded() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    city(a.path(), "3");
    city(b.path(), "3");
    city(c.path(), "4");
    let read = |d: &TempDir| fs::read(d.path().join("checkins.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn generate_several_cities() {
    let t = TempDir::new().unwrap();
    ok(&["generate", "--out-dir", s(t.path()), "--cities", "2", "--n-venues", "50"]);
    assert!(t.path().join("city-000/venues.csv").exists());
    assert!(t.path().join("city-001/checkins.csv").exists());
}

#[test]
fn bad_generate_settings_fail() {
    let t = TempDir::new().unwrap();
    let cfg = t.path().join("bad.conf");
    fs::write(&cfg, "exponent = 0.5\n").unwrap();
    assert!(!siterank(&["generate", "--out-dir", s(t.path()), "--config", s(&cfg)]).status.success());
    fs::write(&cfg, "no-such-key = 1\n").unwrap();
    assert!(!siterank(&["generate", "--out-dir", s(t.path()), "--config", s(&cfg)]).status.success());
    assert!(!siterank(&["generate", "--out-dir", s(t.path()), "--n-venues", "0"]).status.success());
}

#[test]
fn stats_document() {
    let t = TempDir::new().unwrap();
    city(t.path(), "1");
    let (v, c) = data(t.path());
    let text = ok(&["stats", "--venues", &v, "--checkins", &c]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["version", "ccdf", "chains", "transition_cdf"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["chains"][0]["label"], "Bean");
    assert_eq!(doc["chains"][0]["places"], 30);

    let out = siterank(&["stats", "--venues", &v, "--checkins", &c, "--chain", "Nope"]);
    assert!(!out.status.success());
}

#[test]
fn stats_mean_checkins_per_place() {
    // 186 places sharing 210174 check-ins: 1129 each plus one extra at 180.
    let t = TempDir::new().unwrap();
    let mut venues = String::from("id,lat,lon,category,chain\n");
    let mut checkins = String::from("user,venue,timestamp\n");
    for i in 0..186 {
        venues.push_str(&format!("s{i},40.7,{},Coffee,Bucks\n", -74.0 + i as f64 * 1e-3));
        let n = if i < 180 { 1130 } else { 1129 };
        for j in 0..n {
            checkins.push_str(&format!("u{i}-{j},s{i},{j}\n"));
        }
    }
    fs::write(t.path().join("venues.csv"), venues).unwrap();
    fs::write(t.path().join("checkins.csv"), checkins).unwrap();
    let (v, c) = data(t.path());
    let doc: serde_json::Value =
        serde_json::from_str(&ok(&["stats", "--venues", &v, "--checkins", &c, "--chain", "Bucks"]))
            .unwrap();
    assert_eq!(doc["chains"][0]["checkins"], 210174);
    let mean = doc["chains"][0]["mean_checkins"].as_f64().unwrap();
    assert!((mean - 1129.97).abs() < 0.01, "{mean}");
}

#[test]
fn coefficients_for_one_category() {
    let t = TempDir::new().unwrap();
    ok(&[
        "generate", "--out-dir", s(t.path()), "--n-venues", "200", "--categories", "Food",
    ]);
    let (v, c) = data(t.path());
    let text = ok(&["coefficients", "--venues", &v, "--checkins", &c]);
    assert_eq!(text.lines().count(), 2, "{text}");

    let missing = s(&t.path().join("missing.csv")).to_string();
    let out = siterank(&["coefficients", "--venues", &missing, "--checkins", &c]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn transition_ratio_variants() {
    let t = TempDir::new().unwrap();
    city(t.path(), "2");
    let (v, c) = data(t.path());
    let pair = ok(&["transition-ratios", "--venues", &v, "--checkins", &c]);
    let dest = ok(&[
        "transition-ratios", "--venues", &v, "--checkins", &c, "--rho-variant", "destination",
    ]);
    assert_eq!(pair.lines().count(), dest.lines().count());
    assert_ne!(pair, dest);
    assert!(!siterank(&[
        "transition-ratios", "--venues", &v, "--checkins", &c, "--rho-variant", "sideways",
    ])
    .status
    .success());
}

#[test]
fn evaluate_oracle_and_bad_k() {
    let t = TempDir::new().unwrap();
    city(t.path(), "5");
    let (v, c) = data(t.path());
    let base = [
        "evaluate", "--venues", &v, "--checkins", &c, "--chain", "Bean", "--n-experiments", "5",
        "--baseline-trials", "100",
    ];
    let mut args = base.to_vec();
    args.extend(["--ranker", "oracle"]);
    let doc: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
    assert_eq!(doc["ndcg"]["10"], 1.0);
    assert_eq!(doc["test_size"], 10);
    assert_eq!(doc["ranker"], "oracle");

    let mut args = base.to_vec();
    args.extend(["--k", "11"]);
    assert!(!siterank(&args).status.success());
}

#[test]
fn help_exits_cleanly() {
    let out = siterank(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("evaluate"));
}

#[test]
fn flags_override_config_file() {
    let t = TempDir::new().unwrap();
    city(t.path(), "6");
    let (v, c) = data(t.path());
    let cfg = t.path().join("run.conf");
    fs::write(
        &cfg,
        format!(
            "venues = {v}\ncheckins = {c}\nchain = Bean\nranker = density\nn_experiments = 4\nbaseline_trials = 50\n"
        ),
    )
    .unwrap();
    let from_file: serde_json::Value =
        serde_json::from_str(&ok(&["evaluate", "--config", s(&cfg)])).unwrap();
    assert_eq!(from_file["ranker"], "density");
    assert_eq!(from_file["n_experiments"], 4);
    let flagged: serde_json::Value = serde_json::from_str(&ok(&[
        "evaluate", "--config", s(&cfg), "--ranker", "entropy", "--n-experiments", "3",
    ]))
    .unwrap();
    assert_eq!(flagged["ranker"], "entropy");
    assert_eq!(flagged["n_experiments"], 3);
}

#[test]
fn trained_model_scores_features() {
    let t = TempDir::new().unwrap();
    city(t.path(), "7");
    let (v, c) = data(t.path());
    let model = t.path().join("model.json");
    ok(&[
        "train", "--venues", &v, "--checkins", &c, "--chain", "Bean", "--out", s(&model),
    ]);
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert!(saved.is_object());

    let areas = t.path().join("areas.csv");
    fs::write(&areas, "id,lat,lon,category\nx,40.71,-74.01,Coffee\ny,40.705,-74.015,Coffee\n")
        .unwrap();
    let scored = ok(&[
        "features", "--venues", &v, "--checkins", &c, "--areas", s(&areas), "--model", s(&model),
    ]);
    let again = ok(&[
        "features", "--venues", &v, "--checkins", &c, "--areas", s(&areas), "--model", s(&model),
    ]);
    assert_eq!(scored, again);
    let header = scored.lines().next().unwrap();
    assert!(header.ends_with(",score"), "{header}");
    assert_eq!(scored.lines().count(), 3);
}
