//! Closed-form and numerically integrated link metrics.
//!
//! The end-to-end SNDR of the selected relay path is
//!
//! ```text
//!   γ₁γ₂ / (ILR·γ₁γ₂ + (1+ILR)(E[γ₁(m)] + κγ₂ + κ))
//! ```
//!
//! Everything here works from a [`SystemConfig`], which caches the Bussgang
//! coefficients so sweeps only recompute what depends on the SNR point.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::channel::{gg_pdf, prs_mean, prs_pdf, FadingParams, PrsParams};
use crate::error::{invalid, Error, Result};
use crate::impairments::{bussgang, kappa, BussgangCoeffs, HpaKind, HpaModel, IqImbalance, RelayGain};
use crate::quad::{integrate, integrate_pieces, integrate_to_infinity, QuadOptions};
use crate::specfun::{gamma_upper_reg, ln_gamma_signed, meijer_g_log, meijer_g_small_z, MeijerGOrder, SeriesControl};

/// Which average channel power sets the fixed relay gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainReference {
    /// E[|h_m|²] of the selected relay, i.e. E[γ₁(m)].
    #[default]
    SelectedRelay,
    /// Per-branch average γ̄₁.
    PerBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    /// Noise power σ₀².
    pub noise: f64,
    /// Relay output-block power σ².
    pub relay_power: f64,
    pub gain_reference: GainReference,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            noise: 1.0,
            relay_power: 1.0,
            gain_reference: GainReference::SelectedRelay,
        }
    }
}

/// C = scale · log_base(1 + ϖ·SNDR), scale = ½ when `half` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConvention {
    pub log_base: f64,
    pub prefactor: f64,
    pub half: bool,
}

impl Default for CapacityConvention {
    fn default() -> Self {
        Self {
            log_base: 2.0,
            prefactor: std::f64::consts::E / (2.0 * PI),
            half: false,
        }
    }
}

impl CapacityConvention {
    pub fn validate(&self) -> Result<()> {
        if !(self.log_base > 1.0) || !self.log_base.is_finite() {
            return Err(invalid("log_base", "must be finite and > 1"));
        }
        if !(self.prefactor > 0.0) || !self.prefactor.is_finite() {
            return Err(invalid("prefactor", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn apply(&self, sndr: f64) -> f64 {
        let scale = if self.half { 0.5 } else { 1.0 };
        scale * (self.prefactor * sndr).ln_1p() / self.log_base.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerParams {
    pub p: f64,
    pub q: f64,
}

impl BerParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0) || !(q > 0.0) || !p.is_finite() || !q.is_finite() {
            return Err(invalid("p/q", format!("modulation parameters ({p}, {q}) must be > 0")));
        }
        Ok(Self { p, q })
    }
}

/// Full scenario. Construct through [`SystemConfig::new`] so the invariants
/// and the cached Bussgang coefficients stay consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    prs: PrsParams,
    fading: FadingParams,
    hpa: HpaModel,
    iq: IqImbalance,
    link: LinkParams,
    capacity: CapacityConvention,
    coeffs: BussgangCoeffs,
}

impl SystemConfig {
    pub fn new(
        prs: PrsParams,
        fading: FadingParams,
        hpa: HpaModel,
        iq: IqImbalance,
        link: LinkParams,
        capacity: CapacityConvention,
    ) -> Result<Self> {
        prs.validate()?;
        fading.validate()?;
        capacity.validate()?;
        if !(link.noise > 0.0) || !(link.relay_power > 0.0) {
            return Err(invalid("link", "noise and relay power must be > 0"));
        }
        if !(0.0..1.0).contains(&iq.ilr) {
            return Err(invalid("ilr", format!("{} is outside [0, 1)", iq.ilr)));
        }
        let hpa = HpaModel {
            sigma2: link.relay_power,
            ..hpa
        };
        let coeffs = bussgang(&hpa)?;
        let cfg = Self {
            prs,
            fading,
            hpa,
            iq,
            link,
            capacity,
            coeffs,
        };
        cfg.kappa()?;
        Ok(cfg)
    }

    /// N = 5, m = 2, ρ = 0.9, σ_R² = 0.16, ILR = -15 dB, SEL at 0 dB IBO,
    /// both hops at `snr` (linear).
    pub fn defaults(snr: f64) -> Result<Self> {
        Self::new(
            PrsParams::new(5, 2, 0.9, snr)?,
            FadingParams::from_rytov(0.16, snr)?,
            HpaModel::sel(1.0)?,
            IqImbalance::from_ilr(10f64.powf(-1.5))?,
            LinkParams::default(),
            CapacityConvention::default(),
        )
    }

    pub fn prs(&self) -> &PrsParams {
        &self.prs
    }

    pub fn fading(&self) -> &FadingParams {
        &self.fading
    }

    pub fn hpa(&self) -> &HpaModel {
        &self.hpa
    }

    pub fn iq(&self) -> &IqImbalance {
        &self.iq
    }

    pub fn link(&self) -> &LinkParams {
        &self.link
    }

    pub fn capacity_convention(&self) -> &CapacityConvention {
        &self.capacity
    }

    pub fn coeffs(&self) -> &BussgangCoeffs {
        &self.coeffs
    }

    pub fn ilr(&self) -> f64 {
        self.iq.ilr
    }

    /// Both average SNRs (linear); the Bussgang cache is kept.
    pub fn with_snr(&self, snr1: f64, snr2: f64) -> Result<Self> {
        let mut out = self.clone();
        out.prs = self.prs.with_mean_snr(snr1);
        out.fading = self.fading.with_mean_snr(snr2);
        out.prs.validate()?;
        out.fading.validate()?;
        Ok(out)
    }

    pub fn with_snr_db(&self, db: f64) -> Result<Self> {
        let s = crate::db_to_linear(db);
        self.with_snr(s, s)
    }

    pub fn with_prs(&self, prs: PrsParams) -> Result<Self> {
        prs.validate()?;
        let mut out = self.clone();
        out.prs = prs;
        Ok(out)
    }

    pub fn with_hpa(&self, hpa: HpaModel) -> Result<Self> {
        Self::new(self.prs, self.fading, hpa, self.iq, self.link, self.capacity)
    }

    pub fn with_iq(&self, iq: IqImbalance) -> Result<Self> {
        Self::new(self.prs, self.fading, self.hpa, iq, self.link, self.capacity)
    }

    pub fn with_capacity_convention(&self, capacity: CapacityConvention) -> Result<Self> {
        capacity.validate()?;
        let mut out = self.clone();
        out.capacity = capacity;
        Ok(out)
    }

    /// Linear amplifier and a perfect IQ front end.
    pub fn with_ideal_hardware(&self) -> Result<Self> {
        Self::new(
            self.prs,
            self.fading,
            HpaModel::ideal(),
            IqImbalance::ideal(),
            self.link,
            self.capacity,
        )
    }

    pub fn is_ideal(&self) -> bool {
        self.hpa.kind == HpaKind::Ideal && self.iq.ilr == 0.0
    }

    pub fn prs_mean(&self) -> f64 {
        prs_mean(&self.prs)
    }

    /// Fixed relay gain, recomputed for the current first-hop SNR.
    pub fn relay_gain(&self) -> Result<RelayGain> {
        let noise = self.link.noise;
        let gbar = self.prs.mean_snr;
        // P₁ chosen so that P₁/σ₀² = γ̄₁ with unit-power branches
        let p1 = gbar * noise;
        let channel_power = match self.link.gain_reference {
            GainReference::SelectedRelay => self.prs_mean() / gbar,
            GainReference::PerBranch => 1.0,
        };
        RelayGain::new(p1, channel_power, noise, self.link.relay_power)
    }

    pub fn kappa(&self) -> Result<f64> {
        kappa(&self.coeffs, &self.relay_gain()?, self.link.noise)
    }

    /// Frozen SNDR map for fast repeated evaluation.
    pub fn sndr_model(&self) -> Result<SndrModel> {
        Ok(SndrModel {
            ilr: self.ilr(),
            mean1: self.prs_mean(),
            kappa: self.kappa()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SndrModel {
    pub ilr: f64,
    pub mean1: f64,
    pub kappa: f64,
}

impl SndrModel {
    pub fn eval(&self, g1: f64, g2: f64) -> f64 {
        let num = g1 * g2;
        if num == 0.0 {
            return 0.0;
        }
        num / (self.ilr * num + (1.0 + self.ilr) * (self.mean1 + self.kappa * g2 + self.kappa))
    }
}

pub fn sndr(g1: f64, g2: f64, cfg: &SystemConfig) -> Result<f64> {
    Ok(cfg.sndr_model()?.eval(g1, g2))
}

/// Inputs shared by the outage expressions.
struct OutageTerms {
    order: MeijerGOrder,
    ln_prefactor: f64,
    ab2: f64,
    mean1: f64,
    kappa: f64,
    mu2: f64,
}

impl OutageTerms {
    fn new(cfg: &SystemConfig) -> Result<Self> {
        let (a, b) = (cfg.fading.alpha, cfg.fading.beta);
        let order = MeijerGOrder::g50_05([a / 2.0, (a + 1.0) / 2.0, b / 2.0, (b + 1.0) / 2.0, 0.0])?;
        let ln_prefactor = (a + b - 2.0) * LN_2 - PI.ln() - ln_gamma_signed(a)?.0 - ln_gamma_signed(b)?.0;
        Ok(Self {
            order,
            ln_prefactor,
            ab2: (a * b) * (a * b),
            mean1: cfg.prs_mean(),
            kappa: cfg.kappa()?,
            mu2: cfg.fading.electrical_snr(),
        })
    }
}

/// Order-statistic expansion terms (c_n, k_n, w_n) of the first-hop CDF.
fn prs_terms(p: &PrsParams) -> Vec<(f64, f64, f64)> {
    let (nn, m) = (p.relays, p.rank);
    let choose = |n: usize, k: usize| -> f64 {
        let k = k.min(n - k);
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let lead = m as f64 * choose(nn, m);
    (0..m)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let j = (nn - m + n) as f64;
            (lead * choose(m - 1, n) * sign, j + 1.0, j * (1.0 - p.rho) + 1.0)
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MeijerArgument {
    Derived,
    Printed,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MeijerEvaluator {
    Full,
    SmallZ(usize),
}

fn check_threshold(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("x", format!("outage threshold {x} must be finite and > 0")));
    }
    Ok(())
}

fn outage_impl(x: f64, cfg: &SystemConfig, arg: MeijerArgument, eval: MeijerEvaluator) -> Result<f64> {
    check_threshold(x)?;
    let ilr = cfg.ilr();
    if ilr > 0.0 && ilr * x >= 1.0 {
        return Ok(1.0);
    }
    let t = OutageTerms::new(cfg)?;
    let ctl = SeriesControl::default();
    let g1 = cfg.prs.mean_snr;
    let c = x * (1.0 + ilr) / (1.0 - ilr * x);
    let mut sum = 0.0;
    for (coef, k, w) in prs_terms(&cfg.prs) {
        let expo = -k * c * t.kappa / (w * g1);
        if expo < -745.0 {
            continue;
        }
        let z = match arg {
            MeijerArgument::Derived => t.ab2 * (t.mean1 + t.kappa) * k * c / (16.0 * w * g1 * t.mu2),
            MeijerArgument::Printed => t.ab2 * (t.mean1 + t.kappa) * k * x / (16.0 * w * (1.0 - ilr * x) * g1 * t.mu2),
        };
        // the normalized transform E[exp(-s/γ₂)] is ≤ 1 and decays like exp(-5 z^{1/5})
        if !(z < 1e200) {
            continue;
        }
        let ln_g = match eval {
            MeijerEvaluator::Full => {
                let e = meijer_g_log(&t.order, z, &ctl).map_err(|e| Error::MeijerG {
                    z,
                    msg: format!("outage at x = {x}: {e}"),
                })?;
                if e.value.sign <= 0.0 {
                    return Err(Error::MeijerG {
                        z,
                        msg: "non-positive Laplace transform value".into(),
                    });
                }
                e.value.ln_abs
            }
            MeijerEvaluator::SmallZ(k_terms) => {
                let g = meijer_g_small_z(&t.order, z, k_terms)?;
                if g <= 0.0 {
                    return Err(Error::MeijerG {
                        z,
                        msg: "small-argument expansion left its range".into(),
                    });
                }
                g.ln()
            }
        };
        sum += coef / k * (expo + t.ln_prefactor + ln_g).exp();
    }
    check_probability("outage", 1.0 - sum)
}

fn check_probability(func: &'static str, v: f64) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&v) {
        return Err(Error::OutOfRange { func, value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Exact outage probability P[SNDR < x].
pub fn outage(x: f64, cfg: &SystemConfig) -> Result<f64> {
    outage_impl(x, cfg, MeijerArgument::Derived, MeijerEvaluator::Full)
}

/// Outage with the Meijer-G argument lacking the (1+ILR) factor, kept to
/// quantify the difference; identical to [`outage`] when ILR = 0.
pub fn outage_printed(x: f64, cfg: &SystemConfig) -> Result<f64> {
    outage_impl(x, cfg, MeijerArgument::Printed, MeijerEvaluator::Full)
}

/// High-SNR outage: the Meijer-G factor replaced by its leading residues.
pub fn outage_high_snr(x: f64, cfg: &SystemConfig) -> Result<f64> {
    outage_high_snr_terms(x, cfg, 3)
}

/// As [`outage_high_snr`] keeping `k_terms` residues per pole family;
/// `k_terms = 1` is the bare leading-power sum.
pub fn outage_high_snr_terms(x: f64, cfg: &SystemConfig, k_terms: usize) -> Result<f64> {
    outage_impl(x, cfg, MeijerArgument::Derived, MeijerEvaluator::SmallZ(k_terms))
}

/// Asymptotic slope of the outage curve.
pub fn diversity_gain(cfg: &SystemConfig) -> f64 {
    if !cfg.is_ideal() {
        return 0.0;
    }
    let (a, b) = (cfg.fading.alpha, cfg.fading.beta);
    let first = if cfg.prs.rho == 1.0 { cfg.prs.rank as f64 } else { 1.0 };
    first.min(a / 2.0).min(b / 2.0)
}

/// Least-squares slope of -log₁₀ P versus log₁₀ γ̄ on a dB grid.
pub fn fit_log_slope(snr_db: &[f64], values: &[f64]) -> Result<f64> {
    if snr_db.len() != values.len() || snr_db.len() < 2 {
        return Err(invalid("grid", "need at least two matching points"));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(invalid("values", "slope fit needs positive values"));
    }
    let xs: Vec<f64> = snr_db.iter().map(|d| d / 10.0).collect();
    let ys: Vec<f64> = values.iter().map(|v| -v.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Fitted outage slope over `snr_db` (both hops swept together).
pub fn fitted_diversity(x: f64, cfg: &SystemConfig, snr_db: &[f64], high_snr: bool) -> Result<f64> {
    let mut vals = Vec::with_capacity(snr_db.len());
    for &d in snr_db {
        let c = cfg.with_snr_db(d)?;
        vals.push(if high_snr {
            outage_high_snr(x, &c)?
        } else {
            outage(x, &c)?
        });
    }
    fit_log_slope(snr_db, &vals)
}

/// log(1 + ϖ E[γ₁γ₂] / E[denominator]).
pub fn capacity_approx(cfg: &SystemConfig) -> Result<f64> {
    let ilr = cfg.ilr();
    let e1 = cfg.prs_mean();
    let g2 = cfg.fading.mean_snr;
    let k = cfg.kappa()?;
    let num = e1 * g2;
    let den = ilr * num + (1.0 + ilr) * (e1 + k * g2 + k);
    Ok(cfg.capacity.apply(num / den))
}

/// High-SNR SNDR limit 1 / ((1+ILR) ξ/δ² - 1).
pub fn sndr_star(cfg: &SystemConfig) -> Result<f64> {
    let c = cfg.coeffs;
    let ilr = cfg.ilr();
    let excess = (1.0 + ilr) * c.xi / (c.delta * c.delta) - 1.0;
    if !(excess > 0.0) {
        return Err(Error::NoCeiling);
    }
    Ok(1.0 / excess)
}

pub fn capacity_ceiling(cfg: &SystemConfig) -> Result<f64> {
    Ok(cfg.capacity.apply(sndr_star(cfg)?))
}

/// Which denominator the Jensen quantity uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JensenForm {
    /// E[γ₁γ₂ / ((1+ILR)(κγ₂ + E[γ₁] + κ))]: the variable X with
    /// SNDR = X/(ILR·X + 1), for which the bound is Jensen's inequality.
    Bound,
    /// Same with an extra ILR·γ₂ in the denominator.
    ExtraLeakage,
}

impl JensenForm {
    /// (A, B) in γ₁γ₂ / (Aγ₂ + B).
    fn coefficients(self, cfg: &SystemConfig) -> Result<(f64, f64)> {
        let ilr = cfg.ilr();
        let k = cfg.kappa()?;
        let b = (1.0 + ilr) * (cfg.prs_mean() + k);
        let a = match self {
            JensenForm::Bound => (1.0 + ilr) * k,
            JensenForm::ExtraLeakage => ilr + (1.0 + ilr) * k,
        };
        Ok((a, b))
    }
}

/// E[γ₂/(γ₂ + s)] for Gamma-Gamma γ₂ through G^{5,1}_{1,5}; returns
/// (ln of the prefactor without the 1/(4π) constant, ln G).
fn gg_ratio_parts(s: f64, f: &FadingParams) -> Result<(f64, f64)> {
    let (a, b) = (f.alpha, f.beta);
    let mu = f.electrical_snr();
    let l0 = -(a + b) / 4.0;
    let order = MeijerGOrder::g51_15(
        l0,
        [
            (a - b) / 4.0,
            (a - b + 2.0) / 4.0,
            (b - a) / 4.0,
            (b - a + 2.0) / 4.0,
            l0,
        ],
    )?;
    let z = (a * b) * (a * b) * s / (16.0 * mu);
    let g = meijer_g_log(&order, z, &SeriesControl::default())?;
    if g.value.sign <= 0.0 {
        return Err(Error::MeijerG {
            z,
            msg: "non-positive value for a positive expectation".into(),
        });
    }
    let ln_pre = 0.5 * (a + b) * (a * b).ln() + 0.25 * (a + b) * (s.ln() - mu.ln())
        - ln_gamma_signed(a)?.0
        - ln_gamma_signed(b)?.0;
    Ok((ln_pre, g.value.ln_abs))
}

/// E[γ₂/(γ₂ + s)] for Gamma-Gamma γ₂, s > 0.
pub fn gg_ratio_mean(s: f64, f: &FadingParams) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid("s", format!("{s} must be finite and > 0")));
    }
    f.validate()?;
    let (ln_pre, ln_g) = gg_ratio_parts(s, f)?;
    Ok((ln_pre + ln_g).exp() / (4.0 * PI))
}

fn jensen_closed(cfg: &SystemConfig, form: JensenForm) -> Result<f64> {
    let (a, b) = form.coefficients(cfg)?;
    Ok(cfg.prs_mean() / a * gg_ratio_mean(b / a, &cfg.fading)?)
}

/// Closed-form J for the Jensen bound.
pub fn jensen_j(cfg: &SystemConfig) -> Result<f64> {
    jensen_closed(cfg, JensenForm::Bound)
}

/// Closed form of J for either denominator.
pub fn jensen_j_form(cfg: &SystemConfig, form: JensenForm) -> Result<f64> {
    jensen_closed(cfg, form)
}

/// J exactly as typeset: 2π in the constant and a global (-1)^m sign
/// inside the first-hop sum. Reported next to [`jensen_j`], not used.
pub fn jensen_j_printed(cfg: &SystemConfig) -> Result<f64> {
    let (a, b) = JensenForm::Bound.coefficients(cfg)?;
    let (ln_pre, ln_g) = gg_ratio_parts(b / a, &cfg.fading)?;
    let m = cfg.prs.rank;
    let global = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let first: f64 = prs_terms(&cfg.prs)
        .iter()
        .map(|&(c, k, w)| c.abs() * global * w * cfg.prs.mean_snr / (k * k))
        .sum();
    Ok(first / a * (ln_pre + ln_g).exp() / (2.0 * PI))
}

/// J by nested quadrature over the two SNR densities.
pub fn jensen_j_quadrature(cfg: &SystemConfig, form: JensenForm) -> Result<f64> {
    let (a, b) = form.coefficients(cfg)?;
    let opts = QuadOptions::rel(1e-9);
    let g1 = cfg.prs.mean_snr;
    let hop1 = |g: f64| -> Result<f64> {
        let pts = [0.0, 0.5 * g1, 2.0 * g1, 8.0 * g1];
        let head = integrate_pieces(
            |u| u * g / (a * g + b) * prs_pdf(u, &cfg.prs).unwrap_or(0.0),
            &pts,
            opts,
        )?;
        let tail = integrate_to_infinity(
            |u| u * g / (a * g + b) * prs_pdf(u, &cfg.prs).unwrap_or(0.0),
            pts[3],
            opts,
        )?;
        Ok(head.value + tail.value)
    };
    let dens2 = |g: f64| -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        hop1(g).unwrap_or(f64::NAN) * gg_pdf(g, &cfg.fading).unwrap_or(0.0)
    };
    let g2 = cfg.fading.mean_snr;
    let pts = [0.0, 0.25 * g2, g2, 4.0 * g2];
    let head = integrate_pieces(dens2, &pts, opts)?;
    let tail = integrate_to_infinity(dens2, pts[3], opts)?;
    Ok(head.value + tail.value)
}

/// log(1 + ϖ J / (ILR·J + 1)) under the capacity convention.
pub fn jensen_bound(cfg: &SystemConfig) -> Result<f64> {
    let j = jensen_j(cfg)?;
    Ok(cfg.capacity.apply(j / (cfg.ilr() * j + 1.0)))
}

/// Average BER q^p/(2Γ(p)) ∫ γ^{p-1} e^{-qγ} F(γ) dγ with F the outage CDF.
pub fn ber(params: &BerParams, cfg: &SystemConfig) -> Result<f64> {
    let BerParams { p, q } = *params;
    BerParams::new(p, q)?;
    let ln_norm = p * q.ln() - ln_gamma_signed(p)?.0 - LN_2;
    let ilr = cfg.ilr();
    let upper = if ilr > 0.0 { 1.0 / ilr } else { f64::INFINITY };
    let mut failure: Option<Error> = None;
    let mut kernel_cdf = |g: f64| -> f64 {
        if g <= 0.0 || failure.is_some() {
            return 0.0;
        }
        match outage(g, cfg) {
            Ok(f) => f * (ln_norm + (p - 1.0) * g.ln() - q * g).exp(),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let mut pts = vec![0.0];
    for s in [0.25, 1.0, 3.0, 8.0, 20.0, 50.0] {
        let t = s * p.max(1.0) / q;
        if t < upper {
            pts.push(t);
        }
    }
    let opts = QuadOptions::rel(1e-9).with_abs(1e-16);
    let mut body = 0.0;
    if upper.is_finite() {
        pts.push(upper);
        body += integrate_pieces(&mut kernel_cdf, &pts, opts)?.value;
    } else {
        let last = *pts.last().expect("grid is non-empty");
        body += integrate_pieces(&mut kernel_cdf, &pts, opts)?.value;
        body += integrate_to_infinity(&mut kernel_cdf, last, opts)?.value;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let tail = if upper.is_finite() {
        0.5 * gamma_upper_reg(p, q * upper)?
    } else {
        0.0
    };
    let v = body + tail;
    if !(-1e-12..=0.5 + 1e-9).contains(&v) {
        return Err(Error::OutOfRange { func: "ber", value: v });
    }
    Ok(v.clamp(0.0, 0.5))
}

/// Same BER integral for an arbitrary SNDR CDF over [0, ∞).
pub fn ber_of_cdf<F: FnMut(f64) -> f64>(params: &BerParams, mut cdf: F) -> Result<f64> {
    let BerParams { p, q } = *params;
    let ln_norm = p * q.ln() - ln_gamma_signed(p)?.0 - LN_2;
    let f = |g: f64| -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        cdf(g) * (ln_norm + (p - 1.0) * g.ln() - q * g).exp()
    };
    let opts = QuadOptions::rel(1e-10);
    let mut f = f;
    let head = integrate(&mut f, 0.0, p / q, opts)?;
    let tail = integrate_to_infinity(&mut f, p / q, opts)?;
    Ok(head.value + tail.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db_to_linear;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn x10() -> f64 {
        db_to_linear(10.0)
    }

    #[test]
    fn sndr_limits() {
        let cfg = SystemConfig::defaults(100.0).unwrap();
        assert_eq!(sndr(0.0, 5.0, &cfg).unwrap(), 0.0);
        let ideal = cfg.with_ideal_hardware().unwrap();
        let g1 = 37.0;
        let v = sndr(g1, 1e12, &ideal).unwrap();
        assert!(rel(v, g1) < 1e-9);
        let m = cfg.sndr_model().unwrap();
        for (a, b) in [(1e3, 1e3), (1e9, 1e9), (5.0, 1e7)] {
            assert!(m.eval(a, b) < 1.0 / cfg.ilr());
        }
        assert!(m.eval(10.0, 20.0) <= m.eval(11.0, 20.0));
        assert!(m.eval(10.0, 20.0) <= m.eval(10.0, 21.0));
    }

    #[test]
    fn sndr_reference_point() {
        let cfg = SystemConfig::defaults(100.0).unwrap();
        let e1 = cfg.prs_mean();
        let k = cfg.kappa().unwrap();
        let ilr = cfg.ilr();
        let want = 1e4 / (ilr * 1e4 + (1.0 + ilr) * (e1 + 100.0 * k + k));
        assert!(rel(sndr(100.0, 100.0, &cfg).unwrap(), want) < 1e-15);
    }

    #[test]
    fn kappa_uses_selected_relay_mean() {
        let cfg = SystemConfig::defaults(100.0).unwrap();
        let d = cfg.coeffs().distortion_ratio(1.0);
        assert!(rel(cfg.kappa().unwrap(), 1.0 + d * (cfg.prs_mean() + 1.0)) < 1e-12);
        let ideal = cfg.with_ideal_hardware().unwrap();
        assert_eq!(ideal.kappa().unwrap(), 1.0);
    }

    #[test]
    fn outage_guards() {
        let cfg = SystemConfig::defaults(db_to_linear(25.0)).unwrap();
        assert_eq!(outage(1.0 / cfg.ilr(), &cfg).unwrap(), 1.0);
        assert_eq!(outage(40.0, &cfg).unwrap(), 1.0);
        assert_eq!(outage_high_snr(40.0, &cfg).unwrap(), 1.0);
        assert!(outage(1e-9, &cfg).unwrap() < 1e-6);
        assert!(outage(0.0, &cfg).is_err());
    }

    #[test]
    fn outage_is_a_cdf_in_threshold() {
        let cfg = SystemConfig::defaults(db_to_linear(20.0)).unwrap();
        let mut last = 0.0;
        for i in 1..60 {
            let x = 10f64.powf(-3.0 + i as f64 * 0.06);
            let p = outage(x, &cfg).unwrap();
            assert!(p >= last - 1e-12, "x = {x}");
            last = p;
        }
    }

    #[test]
    fn printed_argument_differs_only_with_leakage() {
        let cfg = SystemConfig::defaults(db_to_linear(25.0)).unwrap();
        let a = outage(x10(), &cfg).unwrap();
        let b = outage_printed(x10(), &cfg).unwrap();
        assert!(a != b);
        let clean = cfg.with_iq(IqImbalance::ideal()).unwrap();
        assert_eq!(outage(x10(), &clean).unwrap(), outage_printed(x10(), &clean).unwrap());
    }

    #[test]
    fn high_snr_expansion_tracks_exact() {
        let cfg = SystemConfig::defaults(1.0).unwrap().with_ideal_hardware().unwrap();
        let c = cfg.with_snr_db(50.0).unwrap();
        let exact = outage(x10(), &c).unwrap();
        let approx = outage_high_snr(x10(), &c).unwrap();
        assert!(exact <= 1e-3);
        assert!(rel(approx, exact) < 0.05, "{approx} vs {exact}");
    }

    #[test]
    fn diversity_branches() {
        let cfg = SystemConfig::defaults(1.0).unwrap();
        assert_eq!(diversity_gain(&cfg), 0.0);
        let ideal = cfg.with_ideal_hardware().unwrap();
        assert_eq!(diversity_gain(&ideal), 1.0);
        let full = ideal.with_prs(PrsParams::new(5, 2, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(diversity_gain(&full), 2.0);
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let db = [40.0, 45.0, 50.0, 55.0, 60.0];
        let vals: Vec<f64> = db.iter().map(|d| 3.0 * db_to_linear(*d).powf(-1.7)).collect();
        assert!((fit_log_slope(&db, &vals).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn ceiling_and_linear_limit() {
        let cfg = SystemConfig::defaults(1.0).unwrap();
        let c = cfg.coeffs();
        let want = 1.0 / (cfg.ilr() + (1.0 + cfg.ilr()) * c.distortion_ratio(1.0));
        assert!(rel(sndr_star(&cfg).unwrap(), want) < 1e-12);
        let linear = cfg.with_hpa(HpaModel::sel(1e6).unwrap()).unwrap();
        assert!(rel(sndr_star(&linear).unwrap(), 1.0 / linear.ilr()) < 1e-9);
        let ideal = cfg.with_ideal_hardware().unwrap();
        assert!(matches!(sndr_star(&ideal), Err(Error::NoCeiling)));
        let heavy = cfg.with_iq(crate::impairments::iq_coeffs(1e-6, 0.0).unwrap()).unwrap();
        assert!(sndr_star(&heavy).unwrap() <= 1.0);
    }

    #[test]
    fn capacity_approx_approaches_ceiling() {
        let cfg = SystemConfig::defaults(db_to_linear(60.0)).unwrap();
        let ceil = capacity_ceiling(&cfg).unwrap();
        assert!(rel(capacity_approx(&cfg).unwrap(), ceil) < 0.02);
        let low = cfg.with_snr(1e-9, 1e-9).unwrap();
        assert!(capacity_approx(&low).unwrap() < 1e-8);
    }

    #[test]
    fn capacity_approx_slope_without_impairments() {
        let cfg = SystemConfig::defaults(1.0).unwrap().with_ideal_hardware().unwrap();
        let a = capacity_approx(&cfg.with_snr_db(40.0).unwrap()).unwrap();
        let b = capacity_approx(&cfg.with_snr_db(50.0).unwrap()).unwrap();
        // min-hop SNR grows tenfold: about log₂ 10 bits
        assert!((b - a - 10f64.log2()).abs() < 0.1);
    }

    #[test]
    fn convention_is_configurable() {
        let c = CapacityConvention {
            log_base: 2.0,
            prefactor: 1.0,
            half: true,
        };
        assert!(rel(c.apply(3.0), 1.0) < 1e-15);
        assert!(CapacityConvention { log_base: 1.0, ..c }.validate().is_err());
    }

    #[test]
    fn jensen_closed_form_matches_quadrature() {
        for snr_db in [20.0, 35.0] {
            let cfg = SystemConfig::defaults(db_to_linear(snr_db)).unwrap();
            for form in [JensenForm::Bound, JensenForm::ExtraLeakage] {
                let c = jensen_j_form(&cfg, form).unwrap();
                let q = jensen_j_quadrature(&cfg, form).unwrap();
                assert!(rel(c, q) < 1e-6, "{snr_db} dB: {c} vs {q}");
            }
        }
        let ideal = SystemConfig::defaults(db_to_linear(20.0))
            .unwrap()
            .with_ideal_hardware()
            .unwrap();
        let c = jensen_j(&ideal).unwrap();
        let q = jensen_j_quadrature(&ideal, JensenForm::Bound).unwrap();
        assert!(rel(c, q) < 1e-6);
    }

    #[test]
    fn printed_jensen_is_twice_the_corrected_value() {
        let cfg = SystemConfig::defaults(db_to_linear(20.0)).unwrap();
        let printed = jensen_j_printed(&cfg).unwrap();
        let fixed = jensen_j(&cfg).unwrap();
        // m = 2: the global sign also flips the n = 1 term
        let with_sign = {
            let plus: f64 = prs_terms(cfg.prs())
                .iter()
                .map(|&(c, k, w)| c.abs() * w / (k * k))
                .sum();
            let signed: f64 = prs_terms(cfg.prs()).iter().map(|&(c, k, w)| c * w / (k * k)).sum();
            plus / signed
        };
        assert!(rel(printed / fixed, 2.0 * with_sign) < 1e-12);
    }

    #[test]
    fn ber_degenerate_kernel_is_half() {
        let b = BerParams::new(1.5, 0.7).unwrap();
        assert!(rel(ber_of_cdf(&b, |_| 1.0).unwrap(), 0.5) < 1e-9);
        assert!(BerParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn ber_floor_and_ideal_decay() {
        let b = BerParams::new(1.0, 1.0).unwrap();
        let cfg = SystemConfig::defaults(1.0).unwrap();
        let mut last = 0.5;
        for db in [0.0, 20.0, 40.0, 60.0] {
            let v = ber(&b, &cfg.with_snr_db(db).unwrap()).unwrap();
            assert!(v <= last + 1e-12 && v > 0.0);
            last = v;
        }
        assert!(last > 1e-3, "impairments leave a floor: {last}");
        let ideal = cfg.with_ideal_hardware().unwrap();
        let v40 = ber(&b, &ideal.with_snr_db(40.0).unwrap()).unwrap();
        let v60 = ber(&b, &ideal.with_snr_db(60.0).unwrap()).unwrap();
        assert!(v60 < v40 && v60 < 1e-4);
    }
}
