use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rfso_core::cli::{Scenario, CSV_HEADER};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn rfso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfso"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_configs_parse() {
    let d = Scenario::load(&repo().join("configs/default.toml")).unwrap();
    assert_eq!(d, Scenario::default());
    let t = Scenario::load(&repo().join("configs/twta.toml")).unwrap();
    assert_eq!(t.hpa.kind, rfso_core::impairments::HpaKind::Twta);
}

#[test]
fn default_run_writes_stable_csv_and_report() {
    let cfg = repo().join("configs/default.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = rfso(&[
            "--config",
            path(&cfg),
            "--samples",
            "20000",
            "--seed",
            "9",
            "--out",
            path(dir),
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    for m in ["outage", "capacity", "ber", "diversity", "bounds"] {
        let name = format!("{m}.csv");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
        let body = text(&x);
        let mut lines = body.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), 15);
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("validation.json")).unwrap()).unwrap();
    assert!(report["comparisons"].as_array().unwrap().len() > 40);
    assert_eq!(report["seed"], 9);
}

#[test]
fn capacity_curve_saturates_at_ceiling() {
    let out = tempfile::tempdir().unwrap();
    let o = rfso(&["--metric", "capacity", "--samples", "5000", "--out", path(out.path())]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let body = std::fs::read_to_string(out.path().join("capacity.csv")).unwrap();
    let rows: Vec<Vec<String>> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let approx: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let ceiling: f64 = rows[0][4].parse().unwrap();
    assert!(approx.windows(2).all(|w| w[1] >= w[0]));
    assert!((approx.last().unwrap() - ceiling).abs() / ceiling < 1e-3);
    assert!(!out.path().join("outage.csv").exists());
}

#[test]
fn diversity_with_ideal_hardware_prints_order_and_fit() {
    let out = tempfile::tempdir().unwrap();
    let o = rfso(&["--metric", "diversity", "--ideal", "--out", path(out.path())]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let s = text(&o.stdout);
    assert!(s.contains("diversity gain (closed form) = 1;"), "{s}");
    let fit: f64 = s
        .split("dB = ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((fit - 1.0).abs() < 0.1);
}

#[test]
fn rank_above_relay_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text_cfg = std::fs::read_to_string(repo().join("configs/default.toml"))
        .unwrap()
        .replace("rank = 2", "rank = 6");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text_cfg).unwrap();
    let o = rfso(&["--config", path(&cfg), "--out", path(dir.path())]);
    assert!(!o.status.success());
    assert!(text(&o.stderr).contains("m <= N"), "{}", text(&o.stderr));
}

#[test]
fn fixture_validation_modes() {
    let o = rfso(&["--fixtures", path(&repo().join("fixtures"))]);
    assert!(o.status.success());
    assert!(
        text(&o.stdout).contains("total 237 points, 0 failed"),
        "{}",
        text(&o.stdout)
    );
    let empty = tempfile::tempdir().unwrap();
    let o = rfso(&["--fixtures", path(empty.path())]);
    assert!(!o.status.success());
    assert!(text(&o.stderr).contains("no fixtures"));
}
