//! Golden-value files and their validation.
//!
//! A fixture file is a JSON array of records
//! `{kind, inputs, value, precision_digits}`; `value` is a decimal string
//! from an arbitrary-precision generator. Meijer-G inputs carry
//! `{order, a, b, z}` with order one of `G20_02`, `G50_05`, `G51_15`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analytics::gg_ratio_mean;
use crate::channel::{gg_pdf, FadingParams};
use crate::error::{Error, Result};
use crate::impairments::{bussgang_quadrature, HpaKind, HpaModel};
use crate::specfun::{bessel_k, meijer_g, MeijerGOrder, SeriesControl};

pub const MIN_PRECISION_DIGITS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    MeijerG,
    BesselK,
    GgPdf,
    Bussgang,
    #[serde(alias = "jensen_J")]
    JensenJ,
}

impl FixtureKind {
    /// Relative tolerance each kind is held to.
    pub fn tolerance(self) -> f64 {
        match self {
            FixtureKind::BesselK => 1e-10,
            _ => 1e-8,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FixtureKind::MeijerG => "meijer_g",
            FixtureKind::BesselK => "bessel_k",
            FixtureKind::GgPdf => "gg_pdf",
            FixtureKind::Bussgang => "bussgang",
            FixtureKind::JensenJ => "jensen_j",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub kind: FixtureKind,
    pub inputs: Map<String, Value>,
    pub value: String,
    pub precision_digits: u32,
}

impl FixtureRecord {
    pub fn reference(&self) -> Result<f64> {
        if self.precision_digits < MIN_PRECISION_DIGITS {
            return Err(Error::Fixture(format!(
                "{} digits of precision, need at least {MIN_PRECISION_DIGITS}",
                self.precision_digits
            )));
        }
        let v: f64 = self
            .value
            .trim()
            .parse()
            .map_err(|_| Error::Fixture(format!("value {:?} is not a decimal number", self.value)))?;
        if !v.is_finite() {
            return Err(Error::Fixture(format!("value {:?} is not finite", self.value)));
        }
        Ok(v)
    }

    fn num(&self, key: &str) -> Result<f64> {
        self.inputs
            .get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Fixture(format!("{} record lacks numeric `{key}`", self.kind.name())))
    }

    fn text(&self, key: &str) -> Result<&str> {
        self.inputs
            .get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Fixture(format!("{} record lacks string `{key}`", self.kind.name())))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let arr = self
            .inputs
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Fixture(format!("record lacks array `{key}`")))?;
        arr.iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::Fixture(format!("non-numeric entry in `{key}`")))
            })
            .collect()
    }

    fn meijer_order(&self) -> Result<MeijerGOrder> {
        let a = self.list("a")?;
        let b = self.list("b")?;
        let (m, n, p, q) = match self.text("order")? {
            "G20_02" => (2, 0, 0, 2),
            "G50_05" => (5, 0, 0, 5),
            "G51_15" => (5, 1, 1, 5),
            other => return Err(Error::Fixture(format!("unknown Meijer-G order {other:?}"))),
        };
        MeijerGOrder::new(m, n, p, q, a, b)
    }

    /// Value computed by the double-precision core.
    pub fn evaluate(&self) -> Result<f64> {
        match self.kind {
            FixtureKind::MeijerG => meijer_g(&self.meijer_order()?, self.num("z")?, &SeriesControl::default()),
            FixtureKind::BesselK => bessel_k(self.num("nu")?, self.num("x")?),
            FixtureKind::GgPdf => {
                let f = FadingParams::new(self.num("alpha")?, self.num("beta")?, self.num("mean_snr")?)?;
                gg_pdf(self.num("x")?, &f)
            }
            FixtureKind::JensenJ => {
                let f = FadingParams::new(self.num("alpha")?, self.num("beta")?, self.num("mean_snr")?)?;
                gg_ratio_mean(self.num("s")?, &f)
            }
            FixtureKind::Bussgang => {
                let kind = match self.text("model")? {
                    "sel" => HpaKind::Sel,
                    "twta" => HpaKind::Twta,
                    other => return Err(Error::Fixture(format!("unknown amplifier {other:?}"))),
                };
                let model = HpaModel::new(kind, self.num("ibo")?, self.num("phi0")?, 1.0)?;
                let c = bussgang_quadrature(&model)?;
                match self.text("quantity")? {
                    "delta" => Ok(c.delta),
                    "sigma_d2" => Ok(c.sigma_d2),
                    other => Err(Error::Fixture(format!("unknown Bussgang quantity {other:?}"))),
                }
            }
        }
    }
}

pub fn load_fixture_file(path: &Path) -> Result<Vec<FixtureRecord>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

/// Top-level `*.json` files of `dir`, sorted by name.
pub fn fixture_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureCheck {
    pub file: String,
    pub index: usize,
    pub kind: FixtureKind,
    pub reference: f64,
    /// `None` when the evaluator returned an error.
    pub computed: Option<f64>,
    pub rel_error: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureReport {
    pub checks: Vec<FixtureCheck>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FixtureCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Per-kind count, failures and worst relative error.
    pub fn summary(&self) -> String {
        let mut kinds: Vec<FixtureKind> = Vec::new();
        for c in &self.checks {
            if !kinds.contains(&c.kind) {
                kinds.push(c.kind);
            }
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>6} {:>12} {:>9}",
            "kind", "points", "failed", "max rel err", "tolerance"
        );
        for k in kinds {
            let sel: Vec<&FixtureCheck> = self.checks.iter().filter(|c| c.kind == k).collect();
            let failed = sel.iter().filter(|c| !c.passed).count();
            let worst = sel.iter().map(|c| c.rel_error).fold(0.0, f64::max);
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>6} {:>12.3e} {:>9.0e}",
                k.name(),
                sel.len(),
                failed,
                worst,
                k.tolerance()
            );
        }
        let _ = writeln!(
            out,
            "total {} points, {} failed",
            self.checks.len(),
            self.failures().count()
        );
        out
    }
}

/// Evaluate every record under `dir`. Load errors are hard errors; a
/// failing evaluation is recorded as a failed check.
pub fn validate_fixtures(dir: &Path) -> Result<FixtureReport> {
    let files = fixture_files(dir)?;
    if files.is_empty() {
        return Err(Error::NoFixtures(dir.display().to_string()));
    }
    let mut checks = Vec::new();
    for path in files {
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let recs = load_fixture_file(&path)?;
        for (index, rec) in recs.iter().enumerate() {
            let reference = rec
                .reference()
                .map_err(|e| Error::Fixture(format!("{name}[{index}]: {e}")))?;
            let (computed, rel_error, error) = match rec.evaluate() {
                Ok(v) => {
                    let scale = reference.abs().max(f64::MIN_POSITIVE);
                    (Some(v), (v - reference).abs() / scale, None)
                }
                Err(e) => (None, f64::INFINITY, Some(e.to_string())),
            };
            checks.push(FixtureCheck {
                file: name.clone(),
                index,
                kind: rec.kind,
                reference,
                computed,
                rel_error,
                passed: rel_error <= rec.kind.tolerance(),
                error,
            });
        }
    }
    if checks.is_empty() {
        return Err(Error::NoFixtures(dir.display().to_string()));
    }
    Ok(FixtureReport { checks })
}
