//! Fading models for both hops.
//!
//! First hop: N i.i.d. Rayleigh branches, partial relay selection of the
//! m-th worst branch on outdated CSI with power correlation ρ.
//! Second hop: Gamma-Gamma irradiance with IM/DD, so the electrical SNR is
//! proportional to I².

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::specfun::{gamma_lower_reg, ln_bessel_k, ln_gamma_signed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrsParams {
    /// Relay count N.
    pub relays: usize,
    /// Selection rank m (1 = worst).
    pub rank: usize,
    /// Power correlation between selection- and transmission-time CSI.
    pub rho: f64,
    /// Per-branch average SNR γ̄₁ (linear).
    pub mean_snr: f64,
}

impl PrsParams {
    pub fn new(relays: usize, rank: usize, rho: f64, mean_snr: f64) -> Result<Self> {
        let p = Self {
            relays,
            rank,
            rho,
            mean_snr,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.relays < 1 {
            return Err(invalid("relays", "need at least one relay (N >= 1)"));
        }
        if self.rank < 1 || self.rank > self.relays {
            return Err(invalid(
                "rank",
                format!(
                    "selection rank must satisfy 1 <= m <= N (m = {}, N = {})",
                    self.rank, self.relays
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", format!("{} is outside [0, 1]", self.rho)));
        }
        if !(self.mean_snr > 0.0) || !self.mean_snr.is_finite() {
            return Err(invalid("mean_snr", format!("{} must be > 0", self.mean_snr)));
        }
        Ok(())
    }

    pub fn with_mean_snr(mut self, mean_snr: f64) -> Self {
        self.mean_snr = mean_snr;
        self
    }

    /// (coefficient, k, w) for each term of the order-statistic expansion:
    /// F(x) = 1 - Σ c/k · exp(-k x / (w γ̄₁)).
    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let (n_big, m) = (self.relays, self.rank);
        let lead = m as f64 * binomial(n_big, m);
        (0..m).map(move |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c = lead * binomial(m - 1, n) * sign;
            let j = (n_big - m + n) as f64;
            (c, j + 1.0, j * (1.0 - self.rho) + 1.0)
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// CDF of the transmission-time SNR of the selected relay.
pub fn prs_cdf(x: f64, p: &PrsParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("prs_cdf", format!("x = {x} must be >= 0")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let surv: f64 = p
        .terms()
        .map(|(c, k, w)| c / k * (-k * x / (w * p.mean_snr)).exp())
        .sum();
    Ok((1.0 - surv).clamp(0.0, 1.0))
}

pub fn prs_pdf(x: f64, p: &PrsParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("prs_pdf", format!("x = {x} must be >= 0")));
    }
    let scale = p.mean_snr;
    let v: f64 = p
        .terms()
        .map(|(c, k, w)| c / (w * scale) * (-k * x / (w * scale)).exp())
        .sum();
    Ok(v.max(0.0))
}

/// E[γ₁(m)], term-wise integral of the survival function.
pub fn prs_mean(p: &PrsParams) -> f64 {
    p.terms().map(|(c, k, w)| c * w * p.mean_snr / (k * k)).sum()
}

/// One transmission-time SNR draw by brute-force selection.
pub fn sample_gamma1<R: Rng + ?Sized>(rng: &mut R, p: &PrsParams) -> f64 {
    let mut gains: Vec<(f64, f64)> = Vec::with_capacity(p.relays);
    for _ in 0..p.relays {
        gains.push(complex_gaussian(rng));
    }
    // stable sort: equal powers keep branch order
    let mut order: Vec<usize> = (0..p.relays).collect();
    order.sort_by(|&i, &j| power(gains[i]).total_cmp(&power(gains[j])));
    let selected = gains[order[p.rank - 1]];
    let fresh = complex_gaussian(rng);
    let rho_h = p.rho.sqrt();
    let spread = (1.0 - p.rho).sqrt();
    let h = (
        rho_h * selected.0 + spread * fresh.0,
        rho_h * selected.1 + spread * fresh.1,
    );
    p.mean_snr * power(h)
}

/// CN(0, 1) draw.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (
        re * std::f64::consts::FRAC_1_SQRT_2,
        im * std::f64::consts::FRAC_1_SQRT_2,
    )
}

fn power(h: (f64, f64)) -> f64 {
    h.0 * h.0 + h.1 * h.1
}

/// Gamma-Gamma shapes from the Rytov variance (plane wave).
pub fn rytov_to_shapes(rytov: f64) -> Result<(f64, f64)> {
    if rytov.is_nan() || rytov < 0.0 {
        return Err(domain("rytov_to_shapes", format!("Rytov variance {rytov} < 0")));
    }
    if rytov == 0.0 {
        return Err(invalid(
            "rytov",
            "zero turbulence makes both shape parameters unbounded",
        ));
    }
    let p = rytov.powf(1.2);
    let alpha = 1.0 / ((0.49 * rytov / (1.0 + 1.11 * p).powf(7.0 / 6.0)).exp_m1());
    let beta = 1.0 / ((0.51 * rytov / (1.0 + 0.69 * p).powf(5.0 / 6.0)).exp_m1());
    Ok((alpha, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub alpha: f64,
    pub beta: f64,
    /// Average SNR γ̄₂ = E[γ₂] (linear).
    pub mean_snr: f64,
    /// Rytov variance the shapes came from, if any.
    pub rytov: Option<f64>,
}

impl FadingParams {
    pub fn new(alpha: f64, beta: f64, mean_snr: f64) -> Result<Self> {
        let f = Self {
            alpha,
            beta,
            mean_snr,
            rytov: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_rytov(rytov: f64, mean_snr: f64) -> Result<Self> {
        let (alpha, beta) = rytov_to_shapes(rytov)?;
        let mut f = Self::new(alpha, beta, mean_snr)?;
        f.rytov = Some(rytov);
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0) || v.is_nan() {
                return Err(invalid(name, format!("shape {v} must be > 0")));
            }
        }
        if !(self.mean_snr > 0.0) || !self.mean_snr.is_finite() {
            return Err(invalid("mean_snr", format!("{} must be > 0", self.mean_snr)));
        }
        Ok(())
    }

    pub fn with_mean_snr(mut self, mean_snr: f64) -> Self {
        self.mean_snr = mean_snr;
        self
    }

    /// σ_si² = 1/α + 1/β + 1/(αβ).
    pub fn scintillation_index(&self) -> f64 {
        1.0 / self.alpha + 1.0 / self.beta + 1.0 / (self.alpha * self.beta)
    }

    /// μ₂ = γ̄₂ / (1 + σ_si²), the scale of the SNR density.
    pub fn electrical_snr(&self) -> f64 {
        self.mean_snr / (1.0 + self.scintillation_index())
    }
}

/// Density of γ₂ = μ₂ I² with unit-mean Gamma-Gamma I.
pub fn gg_pdf(x: f64, f: &FadingParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("gg_pdf", format!("x = {x} must be > 0")));
    }
    Ok(gg_ln_pdf(x, f)?.exp())
}

pub(crate) fn gg_ln_pdf(x: f64, f: &FadingParams) -> Result<f64> {
    let (a, b) = (f.alpha, f.beta);
    let mu = f.electrical_snr();
    let s = a + b;
    let ab = a * b;
    let arg = 2.0 * (ab * (x / mu).sqrt()).sqrt();
    Ok(0.5 * s * ab.ln() + (0.25 * s - 1.0) * x.ln()
        - ln_gamma_signed(a)?.0
        - ln_gamma_signed(b)?.0
        - 0.25 * s * mu.ln()
        + ln_bessel_k(a - b, arg)?)
}

/// CDF of γ₂: P(XY ≤ t) = E_X[P(Y ≤ t/X)], t = √(x/μ₂).
pub fn gg_cdf(x: f64, f: &FadingParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("gg_cdf", format!("x = {x} must be >= 0")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let t = (x / f.electrical_snr()).sqrt();
    let (a, b) = (f.alpha, f.beta);
    let ln_norm = a * a.ln() - ln_gamma_signed(a)?.0;
    let inner = |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let dens = (ln_norm + (a - 1.0) * u.ln() - a * u).exp();
        if dens == 0.0 {
            return 0.0;
        }
        dens * gamma_lower_reg(b, b * t / u).unwrap_or(f64::NAN)
    };
    let opts = QuadOptions::rel(1e-11).with_abs(1e-15);
    let head = integrate(inner, 0.0, 1.0, opts)?.value;
    let tail = integrate_to_infinity(inner, 1.0, opts)?.value;
    Ok((head + tail).clamp(0.0, 1.0))
}

/// Reusable γ₂ sampler; holds the two Gamma laws.
#[derive(Debug, Clone)]
pub struct GgSampler {
    x: Gamma<f64>,
    y: Gamma<f64>,
    scale: f64,
}

impl GgSampler {
    pub fn new(f: &FadingParams) -> Result<Self> {
        f.validate()?;
        let x = Gamma::new(f.alpha, 1.0 / f.alpha).map_err(|e| invalid("alpha", e.to_string()))?;
        let y = Gamma::new(f.beta, 1.0 / f.beta).map_err(|e| invalid("beta", e.to_string()))?;
        let second_moment = (1.0 + 1.0 / f.alpha) * (1.0 + 1.0 / f.beta);
        Ok(Self {
            x,
            y,
            scale: f.mean_snr / second_moment,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = self.x.sample(rng) * self.y.sample(rng);
        self.scale * i * i
    }
}

pub fn sample_gamma2<R: Rng + ?Sized>(rng: &mut R, f: &FadingParams) -> Result<f64> {
    Ok(GgSampler::new(f)?.sample(rng))
}
