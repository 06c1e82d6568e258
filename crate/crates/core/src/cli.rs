//! Batch front end: scenario files, SNR sweeps, CSV curves, validation report.
//!
//! Scenario files are TOML. Every SNR-like quantity carries a `_db` suffix
//! and unknown keys are rejected, so `ibo = 0` instead of `ibo_db = 0` is a
//! config error rather than a silent unit bug.

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analytics::{self, BerParams, CapacityConvention, JensenForm, LinkParams, SystemConfig};
use crate::channel::{FadingParams, PrsParams};
use crate::db_to_linear;
use crate::error::{Error, Result};
use crate::fixtures::validate_fixtures;
use crate::impairments::{iq_coeffs, HpaKind, HpaModel, IqImbalance, DEFAULT_PHI0};
use crate::simulate::{self, Estimate, McRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Capacity,
    Ber,
    Diversity,
    Bounds,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Outage,
        Metric::Capacity,
        Metric::Ber,
        Metric::Diversity,
        Metric::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Capacity => "capacity",
            Metric::Ber => "ber",
            Metric::Diversity => "diversity",
            Metric::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ClosedForm,
    MonteCarlo,
    Both,
}

impl Mode {
    fn closed(self) -> bool {
        self != Mode::MonteCarlo
    }

    fn mc(self) -> bool {
        self != Mode::ClosedForm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrsSection {
    pub relays: usize,
    pub rank: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    pub rytov: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpaSection {
    pub kind: HpaKind,
    #[serde(default)]
    pub ibo_db: f64,
    pub phi0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqSection {
    pub ilr_db: Option<f64>,
    pub zeta: Option<f64>,
    pub theta_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "all_metrics")]
    pub metrics: Vec<Metric>,
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
    /// γ̄₁ = γ̄₂ on the axis; otherwise γ̄₂ is pinned at `snr2_db`.
    #[serde(default = "yes")]
    pub lock: bool,
    pub snr2_db: Option<f64>,
    #[serde(default = "both")]
    pub mode: Mode,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageSection {
    pub threshold_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiversitySection {
    pub fit_start_db: f64,
    pub fit_stop_db: f64,
    pub fit_step_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSection {
    /// Failed comparisons make the run exit non-zero.
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "three")]
    pub sigmas: f64,
    /// Absolute slack for probabilities (outage).
    #[serde(default = "outage_floor")]
    pub outage_floor: f64,
    #[serde(default = "slope_tolerance")]
    pub slope_tolerance: f64,
}

impl Default for ValidationSection {
    fn default() -> Self {
        Self {
            strict: false,
            sigmas: 3.0,
            outage_floor: 1e-4,
            slope_tolerance: 0.1,
        }
    }
}

fn all_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}
fn yes() -> bool {
    true
}
fn both() -> Mode {
    Mode::Both
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn three() -> f64 {
    3.0
}
fn outage_floor() -> f64 {
    1e-4
}
fn slope_tolerance() -> f64 {
    0.1
}

/// Whole scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub prs: PrsSection,
    pub fading: FadingSection,
    pub hpa: HpaSection,
    #[serde(default)]
    pub iq: IqSection,
    #[serde(default)]
    pub link: LinkParams,
    #[serde(default)]
    pub capacity: CapacityConvention,
    pub sweep: SweepSection,
    pub outage: OutageSection,
    pub ber: BerParams,
    pub diversity: Option<DiversitySection>,
    pub mc: Option<McRun>,
    #[serde(default)]
    pub validation: ValidationSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::from_toml(DEFAULT_SCENARIO).expect("built-in scenario parses")
    }
}

/// Built-in defaults; identical to `configs/default.toml`.
pub const DEFAULT_SCENARIO: &str = r#"
[prs]
relays = 5
rank = 2
rho = 0.9

[fading]
rytov = 0.16

[hpa]
kind = "sel"
ibo_db = 0.0

[iq]
ilr_db = -15.0

[link]
noise = 1.0
relay_power = 1.0
gain_reference = "selected_relay"

[capacity]
log_base = 2.0
half = false

[sweep]
metrics = ["outage", "capacity", "ber", "diversity", "bounds"]
start_db = 0.0
stop_db = 70.0
step_db = 5.0
lock = true
mode = "both"
out = "out"

[outage]
threshold_db = 10.0

[ber]
p = 1.0
q = 1.0

[diversity]
fit_start_db = 40.0
fit_stop_db = 60.0
fit_step_db = 5.0

[mc]
seed = 1
samples = 1000000
shards = 16

[validation]
strict = false
sigmas = 3.0
outage_floor = 1e-4
slope_tolerance = 0.1
"#;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    /// Type invariants of the sweep plus a trial build of the system.
    pub fn check(&self) -> Result<()> {
        let s = &self.sweep;
        if !(s.step_db > 0.0) {
            return Err(config_err(format!("sweep.step_db = {} must be > 0", s.step_db)));
        }
        if !(s.start_db <= s.stop_db) {
            return Err(config_err(format!(
                "sweep.start_db = {} must not exceed stop_db = {}",
                s.start_db, s.stop_db
            )));
        }
        if s.mode.mc() && self.mc.is_none() {
            return Err(config_err(format!("sweep.mode = {:?} needs an [mc] section", s.mode)));
        }
        if !s.lock && s.snr2_db.is_none() {
            return Err(config_err("sweep.lock = false needs sweep.snr2_db"));
        }
        if s.metrics.is_empty() {
            return Err(config_err("sweep.metrics is empty"));
        }
        if let Some(run) = &self.mc {
            run.validate()?;
        }
        BerParams::new(self.ber.p, self.ber.q)?;
        if let Some(d) = &self.diversity {
            if !(d.fit_step_db > 0.0) || !(d.fit_start_db < d.fit_stop_db) {
                return Err(config_err("diversity fit grid needs start < stop and step > 0"));
            }
        }
        self.system(false)?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        grid_points(self.sweep.start_db, self.sweep.stop_db, self.sweep.step_db)
    }

    /// System at unit SNR; `ideal` swaps in linear hardware.
    pub fn system(&self, ideal: bool) -> Result<SystemConfig> {
        let prs = PrsParams::new(self.prs.relays, self.prs.rank, self.prs.rho, 1.0)?;
        let f = &self.fading;
        let fading = match (f.rytov, f.alpha, f.beta) {
            (Some(r), None, None) => FadingParams::from_rytov(r, 1.0)?,
            (None, Some(a), Some(b)) => FadingParams::new(a, b, 1.0)?,
            _ => return Err(config_err("[fading] takes either `rytov` or both `alpha` and `beta`")),
        };
        let ibo = db_to_linear(self.hpa.ibo_db);
        let hpa = match self.hpa.kind {
            HpaKind::Ideal => HpaModel::ideal(),
            kind => HpaModel::new(kind, ibo, self.hpa.phi0.unwrap_or(DEFAULT_PHI0), self.link.relay_power)?,
        };
        let q = &self.iq;
        let iq = match (q.ilr_db, q.zeta, q.theta_deg) {
            (None, None, None) => IqImbalance::ideal(),
            (Some(d), None, None) => IqImbalance::from_ilr(db_to_linear(d))?,
            (None, Some(z), t) => iq_coeffs(z, t.unwrap_or(0.0).to_radians())?,
            _ => return Err(config_err("[iq] takes either `ilr_db` or `zeta` (+ `theta_deg`)")),
        };
        let cfg = SystemConfig::new(prs, fading, hpa, iq, self.link, self.capacity)?;
        if ideal {
            cfg.with_ideal_hardware()
        } else {
            Ok(cfg)
        }
    }
}

/// start, start+step, ..., up to stop (inclusive within rounding).
pub fn grid_points(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

#[derive(Debug, Parser)]
#[command(
    name = "rfso",
    version,
    about = "Closed-form and Monte Carlo metrics for mixed RF/FSO relaying"
)]
pub struct Args {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run a single metric instead of the configured list.
    #[arg(long, value_enum)]
    pub metric: Option<Metric>,
    /// Master seed for the Monte Carlo streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples per point.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Output directory for CSV files and validation.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat failed closed-form vs Monte Carlo comparisons as errors.
    #[arg(long)]
    pub validate: bool,
    /// Check golden-value fixtures in DIR and exit.
    #[arg(long, value_name = "DIR")]
    pub fixtures: Option<PathBuf>,
    /// Linear amplifier and ideal IQ front end.
    #[arg(long)]
    pub ideal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub metric: &'static str,
    pub check: &'static str,
    pub snr_db: Option<f64>,
    pub closed_form: f64,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub tolerance: f64,
    /// `None` for report-only rows.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub shards: Option<usize>,
    pub ideal: bool,
    pub comparisons: Vec<Comparison>,
    pub passed: usize,
    pub failed: usize,
}

/// One CSV row; `None` is written as an empty field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Row {
    pub snr_db: f64,
    pub closed_form: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub bound_ceiling: Option<f64>,
    pub bound_jensen: Option<f64>,
}

pub const CSV_HEADER: [&str; 6] = [
    "snr_db",
    "closed_form",
    "mc_mean",
    "mc_stderr",
    "bound_ceiling",
    "bound_jensen",
];

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            format!("{}", r.snr_db),
            field(r.closed_form),
            field(r.mc_mean),
            field(r.mc_stderr),
            field(r.bound_ceiling),
            field(r.bound_jensen),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything a run produces, returned for inspection and testing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<(Metric, Vec<Row>)>,
    pub report: Option<ValidationReport>,
    pub messages: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    pub fn failed(&self) -> usize {
        self.report.as_ref().map_or(0, |r| r.failed)
    }
}

struct Sweep<'a> {
    scenario: &'a Scenario,
    base: SystemConfig,
    run: Option<McRun>,
    comparisons: Vec<Comparison>,
    messages: Vec<String>,
}

impl Sweep<'_> {
    fn point(&self, db: f64) -> Result<SystemConfig> {
        let s1 = db_to_linear(db);
        let s2 = if self.scenario.sweep.lock {
            s1
        } else {
            db_to_linear(self.scenario.sweep.snr2_db.expect("checked in Scenario::check"))
        };
        self.base.with_snr(s1, s2)
    }

    fn mode(&self) -> Mode {
        self.scenario.sweep.mode
    }

    fn mc<F: FnOnce(&McRun) -> Result<Estimate>>(&self, f: F) -> Result<Option<Estimate>> {
        match (&self.run, self.mode().mc()) {
            (Some(run), true) => Ok(Some(f(run)?)),
            _ => Ok(None),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn compare(
        &mut self,
        metric: Metric,
        check: &'static str,
        db: Option<f64>,
        cf: f64,
        mc: Option<Estimate>,
        tol: f64,
        kind: Check,
    ) {
        let passed = match (kind, mc) {
            (Check::Report, _) => None,
            (Check::Slope, _) => Some((cf - mc.map_or(f64::NAN, |e| e.mean)).abs() <= tol),
            (_, None) => return,
            (Check::Agree(floor), Some(e)) => Some(e.agrees(cf, self.scenario.validation.sigmas, floor)),
            (Check::Above, Some(e)) => Some(cf >= e.mean - self.scenario.validation.sigmas * e.stderr),
        };
        self.comparisons.push(Comparison {
            metric: metric.name(),
            check,
            snr_db: db,
            closed_form: cf,
            mc_mean: mc.map(|e| e.mean),
            mc_stderr: mc.map(|e| e.stderr),
            tolerance: tol,
            passed,
        });
    }

    fn outage(&mut self) -> Result<Vec<Row>> {
        let x = db_to_linear(self.scenario.outage.threshold_db);
        let floor = self.scenario.validation.outage_floor;
        let mut rows = Vec::new();
        for db in self.scenario.grid() {
            let cfg = self.point(db)?;
            let cf = if self.mode().closed() {
                Some(analytics::outage(x, &cfg)?)
            } else {
                None
            };
            let mc = self.mc(|r| simulate::mc_outage(x, &cfg, r))?;
            if let Some(c) = cf {
                self.compare(
                    Metric::Outage,
                    "closed_form_vs_mc",
                    Some(db),
                    c,
                    mc,
                    floor,
                    Check::Agree(floor),
                );
            }
            rows.push(Row {
                snr_db: db,
                closed_form: cf,
                mc_mean: mc.map(|e| e.mean),
                mc_stderr: mc.map(|e| e.stderr),
                ..Row::default()
            });
        }
        Ok(rows)
    }

    fn capacity(&mut self) -> Result<Vec<Row>> {
        let mut rows = Vec::new();
        for db in self.scenario.grid() {
            let cfg = self.point(db)?;
            let mc = self.mc(|r| simulate::mc_capacity(&cfg, r))?;
            let mut row = Row {
                snr_db: db,
                mc_mean: mc.map(|e| e.mean),
                mc_stderr: mc.map(|e| e.stderr),
                ..Row::default()
            };
            if self.mode().closed() {
                let approx = analytics::capacity_approx(&cfg)?;
                let ceiling = match analytics::capacity_ceiling(&cfg) {
                    Ok(c) => Some(c),
                    Err(Error::NoCeiling) => None,
                    Err(e) => return Err(e),
                };
                let jensen = analytics::jensen_bound(&cfg)?;
                self.compare(
                    Metric::Capacity,
                    "approx_vs_mc",
                    Some(db),
                    approx,
                    mc,
                    0.0,
                    Check::Report,
                );
                self.compare(
                    Metric::Capacity,
                    "jensen_bound_dominates_mc",
                    Some(db),
                    jensen,
                    mc,
                    0.0,
                    Check::Above,
                );
                if let Some(c) = ceiling {
                    self.compare(
                        Metric::Capacity,
                        "ceiling_dominates_mc",
                        Some(db),
                        c,
                        mc,
                        0.0,
                        Check::Above,
                    );
                }
                row.closed_form = Some(approx);
                row.bound_ceiling = ceiling;
                row.bound_jensen = Some(jensen);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    fn ber(&mut self) -> Result<Vec<Row>> {
        let p = self.scenario.ber;
        let mut rows = Vec::new();
        for db in self.scenario.grid() {
            let cfg = self.point(db)?;
            let cf = if self.mode().closed() {
                Some(analytics::ber(&p, &cfg)?)
            } else {
                None
            };
            let mc = self.mc(|r| simulate::mc_ber(&p, &cfg, r))?;
            if let Some(c) = cf {
                self.compare(
                    Metric::Ber,
                    "closed_form_vs_mc",
                    Some(db),
                    c,
                    mc,
                    0.0,
                    Check::Agree(1e-12),
                );
            }
            rows.push(Row {
                snr_db: db,
                closed_form: cf,
                mc_mean: mc.map(|e| e.mean),
                mc_stderr: mc.map(|e| e.stderr),
                ..Row::default()
            });
        }
        Ok(rows)
    }

    fn bounds(&mut self) -> Result<Vec<Row>> {
        let mut rows = Vec::new();
        for db in self.scenario.grid() {
            let cfg = self.point(db)?;
            let mc = self.mc(|r| simulate::mc_jensen_j(&cfg, JensenForm::Bound, r))?;
            let mut row = Row {
                snr_db: db,
                mc_mean: mc.map(|e| e.mean),
                mc_stderr: mc.map(|e| e.stderr),
                ..Row::default()
            };
            if self.mode().closed() {
                let j = analytics::jensen_j(&cfg)?;
                self.compare(
                    Metric::Bounds,
                    "jensen_j_vs_mc",
                    Some(db),
                    j,
                    mc,
                    0.0,
                    Check::Agree(0.0),
                );
                row.closed_form = Some(j);
                row.bound_ceiling = match analytics::capacity_ceiling(&cfg) {
                    Ok(c) => Some(c),
                    Err(Error::NoCeiling) => None,
                    Err(e) => return Err(e),
                };
                row.bound_jensen = Some(analytics::jensen_bound(&cfg)?);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    /// Local slopes of the exact outage along the grid, then a fit over the
    /// configured high-SNR window against the asymptotic diversity order.
    fn diversity(&mut self) -> Result<Vec<Row>> {
        let x = db_to_linear(self.scenario.outage.threshold_db);
        let grid = self.scenario.grid();
        let mut vals = Vec::with_capacity(grid.len());
        for &db in &grid {
            vals.push(analytics::outage(x, &self.point(db)?)?);
        }
        let mut rows = Vec::new();
        for i in 0..grid.len() {
            let slope = if i == 0 || !(vals[i] > 0.0 && vals[i - 1] > 0.0) {
                None
            } else {
                Some((vals[i - 1].log10() - vals[i].log10()) / ((grid[i] - grid[i - 1]) / 10.0))
            };
            rows.push(Row {
                snr_db: grid[i],
                closed_form: slope,
                ..Row::default()
            });
        }
        let d = analytics::diversity_gain(&self.base);
        let fit = self.scenario.diversity.clone().unwrap_or(DiversitySection {
            fit_start_db: 40.0,
            fit_stop_db: 60.0,
            fit_step_db: 5.0,
        });
        let fit_grid = grid_points(fit.fit_start_db, fit.fit_stop_db, fit.fit_step_db);
        let mut fv = Vec::with_capacity(fit_grid.len());
        for &db in &fit_grid {
            fv.push(analytics::outage(x, &self.point(db)?)?);
        }
        let tol = self.scenario.validation.slope_tolerance;
        let slope = if fv.iter().all(|v| *v > 0.0) {
            analytics::fit_log_slope(&fit_grid, &fv)?
        } else {
            f64::NAN
        };
        self.messages.push(format!(
            "diversity gain (closed form) = {d}; fitted slope over {}..{} dB = {slope:.4}",
            fit.fit_start_db, fit.fit_stop_db
        ));
        let as_mc = Estimate {
            mean: slope,
            stderr: 0.0,
            samples: fit_grid.len() as u64,
        };
        self.compare(
            Metric::Diversity,
            "fitted_slope_vs_order",
            None,
            d,
            Some(as_mc),
            tol,
            Check::Slope,
        );
        Ok(rows)
    }
}

#[derive(Clone, Copy)]
enum Check {
    Agree(f64),
    Above,
    Report,
    Slope,
}

/// Execute a scenario; writes CSVs and, when simulation ran, validation.json.
pub fn run_scenario(scenario: &Scenario, metrics: &[Metric], ideal: bool, out: &Path) -> Result<RunOutput> {
    scenario.check()?;
    let base = scenario.system(ideal)?;
    let mut sweep = Sweep {
        scenario,
        base,
        run: scenario.mc,
        comparisons: Vec::new(),
        messages: Vec::new(),
    };
    std::fs::create_dir_all(out)?;
    let mut tables = Vec::new();
    let mut files = Vec::new();
    for &m in metrics {
        let rows = match m {
            Metric::Outage => sweep.outage()?,
            Metric::Capacity => sweep.capacity()?,
            Metric::Ber => sweep.ber()?,
            Metric::Diversity => sweep.diversity()?,
            Metric::Bounds => sweep.bounds()?,
        };
        let path = out.join(format!("{}.csv", m.name()));
        write_csv(&path, &rows)?;
        files.push(path);
        tables.push((m, rows));
    }
    let report = if sweep.comparisons.is_empty() {
        None
    } else {
        let passed = sweep.comparisons.iter().filter(|c| c.passed == Some(true)).count();
        let failed = sweep.comparisons.iter().filter(|c| c.passed == Some(false)).count();
        let run = scenario.mc.filter(|_| scenario.sweep.mode.mc());
        let report = ValidationReport {
            seed: run.map(|r| r.seed),
            samples: run.map(|r| r.samples),
            shards: run.map(|r| r.shards),
            ideal,
            comparisons: sweep.comparisons,
            passed,
            failed,
        };
        let path = out.join("validation.json");
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.into()))?;
        std::fs::write(&path, text + "\n")?;
        files.push(path);
        Some(report)
    };
    Ok(RunOutput {
        tables,
        report,
        messages: sweep.messages,
        files,
    })
}

/// Parsed arguments to exit status; all user-facing text goes to the writers.
pub fn execute(args: &Args, stdout: &mut String, stderr: &mut String) -> i32 {
    match execute_inner(args, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn execute_inner(args: &Args, stdout: &mut String) -> Result<i32> {
    if let Some(dir) = &args.fixtures {
        let report = validate_fixtures(dir)?;
        stdout.push_str(&report.summary());
        for c in report.failures() {
            let _ = writeln!(
                stdout,
                "FAIL {}[{}] {:?} reference {:e} computed {:?} rel {:.3e}",
                c.file, c.index, c.kind, c.reference, c.computed, c.rel_error
            );
        }
        return Ok(if report.passed() { 0 } else { 2 });
    }
    let mut scenario = match &args.config {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    if let Some(run) = scenario.mc.as_mut() {
        if let Some(s) = args.seed {
            run.seed = s;
        }
        if let Some(n) = args.samples {
            run.samples = n;
        }
    }
    if args.validate {
        scenario.validation.strict = true;
    }
    let out = args.out.clone().unwrap_or_else(|| scenario.sweep.out.clone());
    let metrics = match args.metric {
        Some(m) => vec![m],
        None => scenario.sweep.metrics.clone(),
    };
    let res = run_scenario(&scenario, &metrics, args.ideal, &out)?;
    for m in &res.messages {
        let _ = writeln!(stdout, "{m}");
    }
    for f in &res.files {
        let _ = writeln!(stdout, "wrote {}", f.display());
    }
    if let Some(r) = &res.report {
        let _ = writeln!(stdout, "validation: {} passed, {} failed", r.passed, r.failed);
        for c in r.comparisons.iter().filter(|c| c.passed == Some(false)) {
            let _ = writeln!(
                stdout,
                "  mismatch {} {} at {} dB: closed form {:e}, mc {:?} ± {:?}",
                c.metric,
                c.check,
                c.snr_db.map_or("-".into(), |d| d.to_string()),
                c.closed_form,
                c.mc_mean,
                c.mc_stderr
            );
        }
    }
    Ok(if res.failed() > 0 && scenario.validation.strict {
        2
    } else {
        0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenario_parses() {
        let s = Scenario::default();
        assert_eq!(s.prs.relays, 5);
        assert_eq!(s.grid().len(), 15);
        let cfg = s.system(false).unwrap();
        assert!((cfg.ilr() - db_to_linear(-15.0)).abs() < 1e-15);
        let ideal = s.system(true).unwrap();
        assert!(ideal.is_ideal());
        assert_eq!(s.capacity, CapacityConvention::default());
    }

    #[test]
    fn grid_is_inclusive() {
        assert_eq!(grid_points(0.0, 10.0, 5.0), vec![0.0, 5.0, 10.0]);
        assert_eq!(grid_points(0.0, 0.3, 0.1).len(), 4);
        assert_eq!(grid_points(3.0, 3.0, 1.0), vec![3.0]);
    }

    #[test]
    fn invariants_are_named() {
        let bad = DEFAULT_SCENARIO.replace("rank = 2", "rank = 7");
        let e = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("m <= N"), "{e}");
        let bad = DEFAULT_SCENARIO.replace("step_db = 5.0", "step_db = 0.0");
        assert!(Scenario::from_toml(&bad).unwrap_err().to_string().contains("step_db"));
        let bad = DEFAULT_SCENARIO.replace("start_db = 0.0", "start_db = 80.0");
        assert!(Scenario::from_toml(&bad).unwrap_err().to_string().contains("start_db"));
        let bad = DEFAULT_SCENARIO.replace("ibo_db = 0.0", "ibo = 0.0");
        assert!(Scenario::from_toml(&bad).is_err());
        let head = DEFAULT_SCENARIO.split("[mc]").next().unwrap().to_string();
        assert!(Scenario::from_toml(&head).unwrap_err().to_string().contains("[mc]"));
    }

    #[test]
    fn iq_and_fading_alternatives() {
        let s = DEFAULT_SCENARIO
            .replace("ilr_db = -15.0", "zeta = 0.9\ntheta_deg = 5.0")
            .replace("rytov = 0.16", "alpha = 4.0\nbeta = 2.0");
        let cfg = Scenario::from_toml(&s).unwrap().system(false).unwrap();
        assert_eq!(cfg.fading().alpha, 4.0);
        assert!(cfg.ilr() > 0.0);
        let both = DEFAULT_SCENARIO.replace("rytov = 0.16", "rytov = 0.16\nalpha = 3.0");
        assert!(Scenario::from_toml(&both).is_err());
    }
}
