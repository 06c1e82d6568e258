use std::path::PathBuf;

use rfso_core::fixtures::{load_fixture_file, validate_fixtures, FixtureKind};
use rfso_core::Error;

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn shipped_fixtures_pass() {
    let report = validate_fixtures(&shipped()).unwrap();
    print!("{}", report.summary());
    for c in report.failures() {
        println!(
            "FAIL {}[{}] ref {} got {:?} rel {:.3e} {:?}",
            c.file, c.index, c.reference, c.computed, c.rel_error, c.error
        );
    }
    assert!(report.checks.len() >= 200);
    for k in [FixtureKind::MeijerG, FixtureKind::BesselK, FixtureKind::GgPdf] {
        assert!(report.checks.iter().any(|c| c.kind == k));
    }
    assert!(report.passed());
}

#[test]
fn all_three_meijer_orders_present() {
    let recs = load_fixture_file(&shipped().join("meijer_g.json")).unwrap();
    for order in ["G20_02", "G50_05", "G51_15"] {
        assert!(recs.iter().any(|r| r.inputs["order"] == order), "{order}");
    }
}

#[test]
fn perturbed_fixture_fails() {
    let dir = tempfile::tempdir().unwrap();
    let mut recs = load_fixture_file(&shipped().join("bessel_k.json")).unwrap();
    let v: f64 = recs[3].value.parse().unwrap();
    recs[3].value = format!("{:.31e}", v * (1.0 + 1e-6));
    std::fs::write(dir.path().join("bessel_k.json"), serde_json::to_string(&recs).unwrap()).unwrap();
    let report = validate_fixtures(dir.path()).unwrap();
    assert!(!report.passed());
    assert_eq!(report.failures().count(), 1);
}

#[test]
fn empty_dir_is_an_explicit_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(validate_fixtures(dir.path()), Err(Error::NoFixtures(_))));
}

#[test]
fn corrupt_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "[{\"kind\": ").unwrap();
    assert!(matches!(validate_fixtures(dir.path()), Err(Error::Fixture(_))));
}
