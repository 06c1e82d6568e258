//! Relay amplifier nonlinearity, Bussgang linearization, IQ imbalance at
//! the destination, and the relay gain that ties them together.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_pieces, integrate_to_infinity, QuadOptions};
use crate::specfun::erfc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HpaKind {
    Ideal,
    Sel,
    Twta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpaModel {
    pub kind: HpaKind,
    /// Input back-off A_sat²/σ² (linear).
    pub ibo: f64,
    /// Peak AM/PM phase shift of the TWTA (radians).
    pub phi0: f64,
    /// Mean input power σ² seen by the amplifier.
    pub sigma2: f64,
}

pub const DEFAULT_PHI0: f64 = PI / 3.0;

impl HpaModel {
    pub fn ideal() -> Self {
        Self {
            kind: HpaKind::Ideal,
            ibo: f64::INFINITY,
            phi0: 0.0,
            sigma2: 1.0,
        }
    }

    pub fn sel(ibo: f64) -> Result<Self> {
        Self::new(HpaKind::Sel, ibo, 0.0, 1.0)
    }

    pub fn twta(ibo: f64) -> Result<Self> {
        Self::new(HpaKind::Twta, ibo, DEFAULT_PHI0, 1.0)
    }

    pub fn new(kind: HpaKind, ibo: f64, phi0: f64, sigma2: f64) -> Result<Self> {
        let m = Self {
            kind,
            ibo,
            phi0,
            sigma2,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(invalid("sigma2", "amplifier input power must be > 0"));
        }
        if self.kind != HpaKind::Ideal && !(self.ibo > 0.0) {
            return Err(invalid("ibo", format!("input back-off {} must be > 0", self.ibo)));
        }
        if !self.phi0.is_finite() {
            return Err(invalid("phi0", "must be finite"));
        }
        Ok(())
    }

    /// A_sat = √(IBO·σ²).
    pub fn a_sat(&self) -> f64 {
        (self.ibo * self.sigma2).sqrt()
    }

    /// Output envelope and phase shift for input envelope r.
    pub fn amam_ampm(&self, r: f64) -> (f64, f64) {
        match self.kind {
            HpaKind::Ideal => (r, 0.0),
            HpaKind::Sel => (r.min(self.a_sat()), 0.0),
            HpaKind::Twta => {
                let a2 = self.ibo * self.sigma2;
                let d = a2 + r * r;
                (a2 * r / d, self.phi0 * r * r / d)
            }
        }
    }

    /// Characteristic in units of σ: (g(u), φ(u)) with u = r/σ.
    fn normalized(&self, u: f64) -> (f64, f64) {
        match self.kind {
            HpaKind::Ideal => (u, 0.0),
            HpaKind::Sel => (u.min(self.ibo.sqrt()), 0.0),
            HpaKind::Twta => {
                let d = self.ibo + u * u;
                (self.ibo * u / d, self.phi0 * u * u / d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BussgangCoeffs {
    /// |linear scale|.
    pub delta: f64,
    /// Distortion power σ_d².
    pub sigma_d2: f64,
    /// δ² + σ_d²/σ².
    pub xi: f64,
}

impl BussgangCoeffs {
    pub const IDEAL: BussgangCoeffs = BussgangCoeffs {
        delta: 1.0,
        sigma_d2: 0.0,
        xi: 1.0,
    };

    /// σ_d² / (δ² σ²): distortion relative to the useful output.
    pub fn distortion_ratio(&self, sigma2: f64) -> f64 {
        self.sigma_d2 / (self.delta * self.delta * sigma2)
    }
}

/// δ for the soft limiter in closed form.
pub fn sel_delta(ibo: f64) -> f64 {
    -(-ibo).exp_m1() + 0.5 * (PI * ibo).sqrt() * erfc(ibo.sqrt())
}

/// Bussgang coefficients; closed form for SEL, quadrature otherwise.
pub fn bussgang(model: &HpaModel) -> Result<BussgangCoeffs> {
    model.validate()?;
    match model.kind {
        HpaKind::Ideal => Ok(BussgangCoeffs::IDEAL),
        HpaKind::Sel => {
            let delta = sel_delta(model.ibo);
            let xi = -(-model.ibo).exp_m1();
            let d = (xi - delta * delta).max(0.0);
            Ok(BussgangCoeffs {
                delta,
                sigma_d2: d * model.sigma2,
                xi: delta * delta + d,
            })
        }
        HpaKind::Twta => bussgang_quadrature(model),
    }
}

/// E over a Rayleigh envelope with E[r²] = σ², written in t = r²/σ².
pub fn bussgang_quadrature(model: &HpaModel) -> Result<BussgangCoeffs> {
    model.validate()?;
    if model.kind == HpaKind::Ideal {
        return Ok(BussgangCoeffs::IDEAL);
    }
    const CUT: f64 = 60.0;
    // the SEL kink at t = IBO stays a breakpoint even beyond the cut
    let mut pts = vec![0.0, model.ibo.min(CUT), model.ibo.max(CUT)];
    pts.dedup();
    let last = pts[pts.len() - 1];
    let opts = QuadOptions::rel(1e-12);
    let over = |f: &dyn Fn(f64) -> f64, opts: QuadOptions| -> Result<f64> {
        let head = integrate_pieces(f, &pts, opts)?;
        let tail = integrate_to_infinity(f, last, opts)?;
        Ok(head.value + tail.value)
    };
    let output = |t: f64| -> Complex64 {
        let (g, phi) = model.normalized(t.sqrt());
        Complex64::from_polar(g, phi)
    };
    let re = over(&|t| t.sqrt() * output(t).re * (-t).exp(), opts)?;
    let im = over(&|t| t.sqrt() * output(t).im * (-t).exp(), opts.with_abs(1e-16))?;
    let dc = Complex64::new(re, im);
    let delta = dc.norm();
    if !(delta > 0.0) {
        return Err(Error::Quadrature("Bussgang scale vanished".into()));
    }
    let dist = |t: f64| (output(t) - dc * t.sqrt()).norm_sqr() * (-t).exp();
    // relative accuracy even when σ_d² is astronomically small; an absolute
    // floor only if rounding noise keeps the pure relative target out of reach
    let d = over(&dist, opts.with_abs(0.0)).or_else(|_| over(&dist, opts.with_abs(1e-18)))?;
    Ok(BussgangCoeffs {
        delta,
        sigma_d2: d * model.sigma2,
        xi: delta * delta + d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqImbalance {
    pub zeta: f64,
    pub theta: f64,
    pub w1: Complex64,
    pub w2: Complex64,
    pub ilr: f64,
}

pub fn iq_coeffs(zeta: f64, theta: f64) -> Result<IqImbalance> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(invalid("zeta", format!("magnitude imbalance {zeta} must be > 0")));
    }
    if !theta.is_finite() {
        return Err(invalid("theta", "must be finite"));
    }
    let w1 = (Complex64::new(1.0, 0.0) + Complex64::from_polar(zeta, -theta)) / 2.0;
    let w2 = (Complex64::new(1.0, 0.0) - Complex64::from_polar(zeta, theta)) / 2.0;
    let ilr = (w2 / w1).norm_sqr();
    Ok(IqImbalance {
        zeta,
        theta,
        w1,
        w2,
        ilr,
    })
}

impl IqImbalance {
    pub fn ideal() -> Self {
        iq_coeffs(1.0, 0.0).expect("ideal IQ parameters are valid")
    }

    /// Phase-balanced front end (θ = 0, ζ ≤ 1) with the requested ILR.
    pub fn from_ilr(ilr: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ilr) {
            return Err(invalid("ilr", format!("{ilr} is outside [0, 1)")));
        }
        let s = ilr.sqrt();
        iq_coeffs((1.0 - s) / (1.0 + s), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayGain {
    pub gain: f64,
}

impl RelayGain {
    /// G² = σ² / (E[|h|²] P₁ + σ₀²).
    pub fn new(p1: f64, channel_power: f64, noise: f64, target_power: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("channel_power", channel_power)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} must be >= 0")));
            }
        }
        for (name, v) in [("noise", noise), ("target_power", target_power)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} must be > 0")));
            }
        }
        Ok(Self {
            gain: (target_power / (channel_power * p1 + noise)).sqrt(),
        })
    }

    /// Same gain written through the average received SNR E[|h|²]P₁/σ₀².
    pub fn from_snr(snr: f64, noise: f64, target_power: f64) -> Result<Self> {
        Self::new(snr * noise, 1.0, noise, target_power)
    }
}

/// κ = 1 + σ_d² / (δ² G² σ₀²).
pub fn kappa(c: &BussgangCoeffs, g: &RelayGain, noise: f64) -> Result<f64> {
    if !(c.delta > 0.0) {
        return Err(invalid("delta", "amplifier fully saturated (δ = 0)"));
    }
    if !(g.gain > 0.0) {
        return Err(invalid("gain", "relay gain must be > 0"));
    }
    if !(noise > 0.0) {
        return Err(invalid("noise", "noise power must be > 0"));
    }
    if c.sigma_d2 == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 + c.sigma_d2 / (c.delta * c.delta * g.gain * g.gain * noise))
}
