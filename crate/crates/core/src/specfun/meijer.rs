//! Meijer-G evaluation for the three orders the link analysis needs:
//! G^{2,0}_{0,2}, G^{5,0}_{0,5} and G^{5,1}_{1,5}.
//!
//! All three have m = q and n = p, so the Mellin–Barnes integrand is
//!
//! ```text
//!   Π_j Γ(b_j + u) · Π_i Γ(1 - a_i - u) · z^{-u}
//! ```
//!
//! with every left pole coming from the Γ(b_j + u) factors. Two routes
//! are implemented:
//!
//! - a residue series, one generalized hypergeometric series per b_k,
//!   accumulated in log space so large Γ ratios never overflow;
//! - trapezoidal quadrature of the integral along a vertical line placed
//!   at the saddle point of the integrand (clamped away from poles).
//!
//! Parameters whose pairwise differences are integers make the residue
//! series singular. Those are perturbed by ±ε/2 (or a symmetric ladder for
//! larger collision classes) and the two mirror-image perturbations are
//! averaged, which removes the first-order error in ε.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::gamma::{digamma, is_nonpositive_integer, ln_gamma_complex, ln_gamma_signed};
use crate::error::{invalid, Error, Result};

const SUPPORTED: [(usize, usize, usize, usize); 3] = [(2, 0, 0, 2), (5, 0, 0, 5), (5, 1, 1, 5)];

/// Tolerance for deciding that two b-parameters differ by an integer.
const COLLISION_TOL: f64 = 1e-10;

/// Largest cancellation (term magnitude / result) tolerated by the contour.
const CONTOUR_MAX_CANCELLATION: f64 = 1e8;

/// Parameters of a Meijer-G function restricted to the supported orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeijerGOrder {
    m: usize,
    n: usize,
    p: usize,
    q: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl MeijerGOrder {
    pub fn new(m: usize, n: usize, p: usize, q: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if !SUPPORTED.contains(&(m, n, p, q)) {
            return Err(Error::UnsupportedOrder { m, n, p, q });
        }
        if a.len() != p {
            return Err(invalid("a", format!("expected {p} entries, got {}", a.len())));
        }
        if b.len() != q {
            return Err(invalid("b", format!("expected {q} entries, got {}", b.len())));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(invalid("a/b", "parameters must be finite"));
        }
        let order = Self { m, n, p, q, a, b };
        let (lo, hi) = order.strip();
        if lo >= hi {
            return Err(invalid(
                "a",
                "left and right pole families overlap; no separating contour",
            ));
        }
        Ok(order)
    }

    pub fn g20_02(b1: f64, b2: f64) -> Result<Self> {
        Self::new(2, 0, 0, 2, vec![], vec![b1, b2])
    }

    pub fn g50_05(b: [f64; 5]) -> Result<Self> {
        Self::new(5, 0, 0, 5, vec![], b.to_vec())
    }

    pub fn g51_15(a1: f64, b: [f64; 5]) -> Result<Self> {
        Self::new(5, 1, 1, 5, vec![a1], b.to_vec())
    }

    pub fn indices(&self) -> (usize, usize, usize, usize) {
        (self.m, self.n, self.p, self.q)
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Open interval of Re u separating the left and right pole families.
    fn strip(&self) -> (f64, f64) {
        let lo = self.b.iter().map(|b| -b).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.a.iter().map(|a| 1.0 - a).fold(f64::INFINITY, f64::min);
        (lo, hi)
    }
}

/// Evaluation controls shared by both routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub pole_eps: f64,
    pub contour_threshold: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 2000,
            pole_eps: 1e-6,
            contour_threshold: 10.0,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", "must be > 0"));
        }
        if !(self.pole_eps > 0.0) {
            return Err(invalid("pole_eps", "must be > 0"));
        }
        if self.max_terms < 1 {
            return Err(invalid("max_terms", "must be >= 1"));
        }
        if !(self.contour_threshold > 0.0) {
            return Err(invalid("contour_threshold", "must be > 0"));
        }
        Ok(())
    }

    /// Largest term-to-result ratio the residue series may show before the
    /// contour takes over.
    fn series_cancellation_limit(&self) -> f64 {
        (4.0 * self.rel_tol / f64::EPSILON).max(10.0)
    }
}

/// A real number stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                ln_abs: v.abs().ln(),
                sign: v.signum(),
            }
        }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    /// Mean of two values, computed on a common scale.
    fn mean(self, other: LogValue) -> LogValue {
        let scale = self.ln_abs.max(other.ln_abs);
        if scale == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let s = 0.5 * (self.sign * (self.ln_abs - scale).exp() + other.sign * (other.ln_abs - scale).exp());
        let mut out = LogValue::from_value(s);
        out.ln_abs += scale;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Series,
    Contour,
}

#[derive(Debug, Clone, Copy)]
pub struct MeijerEval {
    pub value: LogValue,
    pub path: EvalPath,
    /// Ratio of the largest summed term to the result; 1 means no cancellation.
    pub cancellation: f64,
}

/// G(z) for z > 0, choosing the route automatically.
pub fn meijer_g(order: &MeijerGOrder, z: f64, ctl: &SeriesControl) -> Result<f64> {
    Ok(meijer_g_log(order, z, ctl)?.value.value())
}

/// G(z) in sign/log form with route diagnostics.
pub fn meijer_g_log(order: &MeijerGOrder, z: f64, ctl: &SeriesControl) -> Result<MeijerEval> {
    ctl.validate()?;
    check_z(z)?;
    if z <= ctl.contour_threshold {
        match meijer_g_series(order, z, ctl) {
            Ok(e) if e.cancellation <= ctl.series_cancellation_limit() => return Ok(e),
            Ok(_) | Err(_) => {}
        }
    }
    meijer_g_contour(order, z, ctl).map_err(|e| Error::MeijerG {
        z,
        msg: format!("series unusable and contour failed: {e}"),
    })
}

fn check_z(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::MeijerG {
            z,
            msg: "argument must be finite and > 0".into(),
        });
    }
    Ok(())
}

/// Residue-series route, with ε-perturbation for integer-spaced b.
pub fn meijer_g_series(order: &MeijerGOrder, z: f64, ctl: &SeriesControl) -> Result<MeijerEval> {
    check_z(z)?;
    residue_sum(order, z, ctl, None)
}

/// Leading-power expansion of G^{5,0}_{0,5} for small z: the first
/// `k_terms` residues of every pole family (k_terms = 1 keeps only
/// Σ_k Π_{j≠k} Γ(b_j - b_k) z^{b_k}).
pub fn meijer_g_small_z(order: &MeijerGOrder, z: f64, k_terms: usize) -> Result<f64> {
    if order.indices() != (5, 0, 0, 5) {
        let (m, n, p, q) = order.indices();
        return Err(Error::UnsupportedOrder { m, n, p, q });
    }
    if k_terms < 1 {
        return Err(invalid("k_terms", "must be >= 1"));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::MeijerG {
            z,
            msg: "argument must be finite and >= 0".into(),
        });
    }
    if z == 0.0 {
        return zero_limit(order);
    }
    let ctl = SeriesControl::default();
    Ok(residue_sum(order, z, &ctl, Some(k_terms))?.value.value())
}

/// G(0⁺): finite only when the smallest b is exactly zero.
fn zero_limit(order: &MeijerGOrder) -> Result<f64> {
    let min = order.b.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        return Ok(0.0);
    }
    if min < 0.0 || order.b.iter().filter(|&&b| b == 0.0).count() > 1 {
        return Err(Error::MeijerG {
            z: 0.0,
            msg: "G diverges as z -> 0 for these parameters".into(),
        });
    }
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &b in order.b.iter().filter(|&&b| b != 0.0) {
        let (l, s) = ln_gamma_signed(b)?;
        ln += l;
        sign *= s;
    }
    for &a in &order.a {
        let (l, s) = ln_gamma_signed(1.0 - a)?;
        ln += l;
        sign *= s;
    }
    Ok(sign * ln.exp())
}

/// Offsets breaking every integer-spaced collision among `b`, or None.
fn collision_offsets(b: &[f64], eps: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut class: Vec<usize> = (0..n).collect();
    let mut any = false;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = b[i] - b[j];
            if (d - d.round()).abs() <= COLLISION_TOL * (1.0 + d.abs()) {
                any = true;
                let (ci, cj) = (class[i], class[j]);
                for c in class.iter_mut() {
                    if *c == cj {
                        *c = ci;
                    }
                }
            }
        }
    }
    if !any {
        return None;
    }
    let mut offsets = vec![0.0; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut members: Vec<usize> = (0..n).filter(|&i| class[i] == class[root]).collect();
        for &i in &members {
            seen[i] = true;
        }
        if members.len() < 2 {
            continue;
        }
        members.sort_by(|&x, &y| b[x].total_cmp(&b[y]).then(x.cmp(&y)));
        let mid = (members.len() - 1) as f64 / 2.0;
        for (rank, &i) in members.iter().enumerate() {
            offsets[i] = eps * (rank as f64 - mid);
        }
    }
    Some(offsets)
}

fn residue_sum(order: &MeijerGOrder, z: f64, ctl: &SeriesControl, truncate: Option<usize>) -> Result<MeijerEval> {
    let b = &order.b;
    let Some(offsets) = collision_offsets(b, ctl.pole_eps) else {
        let zero = vec![0.0; b.len()];
        return residue_sum_distinct(b, &zero, &order.a, z, ctl, truncate);
    };
    let mirrored: Vec<f64> = offsets.iter().map(|o| -o).collect();
    let e1 = residue_sum_distinct(b, &offsets, &order.a, z, ctl, truncate)?;
    let e2 = residue_sum_distinct(b, &mirrored, &order.a, z, ctl, truncate)?;
    let value = e1.value.mean(e2.value);
    let scale = e1.value.ln_abs.max(e2.value.ln_abs);
    let blowup = if value.sign == 0.0 {
        f64::INFINITY
    } else {
        (scale - value.ln_abs).exp()
    };
    Ok(MeijerEval {
        value,
        path: EvalPath::Series,
        cancellation: e1.cancellation.max(e2.cancellation) * blowup,
    })
}

/// b_j - b_k as (base, δ): integer-spaced pairs get an exact integer base
/// so the perturbation δ is never lost to rounding.
fn shifted_difference(b: &[f64], offsets: &[f64], j: usize, k: usize) -> (f64, f64) {
    let d = b[j] - b[k];
    let r = d.round();
    let delta = offsets[j] - offsets[k];
    if (d - r).abs() <= COLLISION_TOL * (1.0 + d.abs()) {
        (r, delta)
    } else {
        (d + delta, 0.0)
    }
}

/// ln|Γ(base + δ)| and sign, accurate in δ when base is a non-positive
/// integer: Γ(x) = Γ(x + n + 1) / Π_{i=0}^{n} (x + i) with n = -base.
fn ln_gamma_shifted(base: f64, delta: f64) -> Result<(f64, f64)> {
    if delta == 0.0 || base > 0.0 {
        return ln_gamma_signed(base + delta);
    }
    let n = (-base) as usize;
    // x + n + 1 = 1 + δ
    let (mut ln, mut sign) = ln_gamma_signed(1.0 + delta)?;
    for i in 0..=n {
        let f = (base + i as f64) + delta;
        ln -= f.abs().ln();
        sign *= f.signum();
    }
    Ok((ln, sign))
}

/// Σ_k Π_{j≠k} Γ(b_j - b_k) Π_i Γ(1 - a_i + b_k) z^{b_k} · F_k(z),
/// with b = base + offsets.
fn residue_sum_distinct(
    base: &[f64],
    offsets: &[f64],
    a: &[f64],
    z: f64,
    ctl: &SeriesControl,
    truncate: Option<usize>,
) -> Result<MeijerEval> {
    let b: Vec<f64> = base.iter().zip(offsets).map(|(b, o)| b + o).collect();
    let ln_z = z.ln();
    let mut families = Vec::with_capacity(b.len());
    for (k, &bk) in b.iter().enumerate() {
        let diff: Vec<(f64, f64)> = (0..b.len()).map(|j| shifted_difference(base, offsets, j, k)).collect();
        let mut ln_t = bk * ln_z;
        let mut sign = 1.0;
        for (j, &bj) in b.iter().enumerate() {
            if j == k {
                continue;
            }
            let (l, s) = ln_gamma_shifted(diff[j].0, diff[j].1).map_err(|_| Error::MeijerG {
                z,
                msg: format!("b-parameters {bj} and {bk} differ by an integer"),
            })?;
            ln_t += l;
            sign *= s;
        }
        for &ai in a {
            let arg = 1.0 - ai + bk;
            if is_nonpositive_integer(arg) {
                return Err(Error::MeijerG {
                    z,
                    msg: format!("left and right poles collide (a = {ai}, b = {bk})"),
                });
            }
            let (l, s) = ln_gamma_signed(arg)?;
            ln_t += l;
            sign *= s;
        }

        let max_terms = truncate.unwrap_or(ctl.max_terms);
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut peak = 1.0f64;
        let mut converged = truncate.is_some();
        for l in 0..max_terms.saturating_sub(1) {
            let lf = l as f64;
            let mut ratio = -z / (lf + 1.0);
            for (j, &(d, delta)) in diff.iter().enumerate() {
                if j != k {
                    ratio /= (d - (lf + 1.0)) + delta;
                }
            }
            for &ai in a {
                ratio *= 1.0 - ai + bk + lf;
            }
            term *= ratio;
            sum += term;
            peak = peak.max(term.abs());
            if truncate.is_none() && term.abs() <= ctl.rel_tol * 1e-3 * sum.abs() && ratio.abs() < 0.5 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::MeijerG {
                z,
                msg: format!("residue series did not converge in {max_terms} terms"),
            });
        }
        families.push((ln_t, sign, sum, peak));
    }

    let scale = families
        .iter()
        .map(|f| f.0 + f.3.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut magnitude = 0.0;
    for &(ln_t, sign, sum, peak) in &families {
        let w = (ln_t - scale).exp();
        total += sign * w * sum;
        magnitude += w * peak;
    }
    let mut value = LogValue::from_value(total);
    value.ln_abs += scale;
    let cancellation = if total == 0.0 {
        f64::INFINITY
    } else {
        magnitude / total.abs()
    };
    Ok(MeijerEval {
        value,
        path: EvalPath::Series,
        cancellation,
    })
}

/// Mellin–Barnes route: G = (1/π) ∫₀^∞ Re φ(c + it) dt on the line Re u = c.
pub fn meijer_g_contour(order: &MeijerGOrder, z: f64, ctl: &SeriesControl) -> Result<MeijerEval> {
    check_z(z)?;
    let (lo, hi) = order.strip();
    let ln_z = z.ln();
    let b = &order.b;
    let a = &order.a;

    // saddle of the integrand on the real axis: d/du ln φ = 0
    let slope = |c: f64| -> f64 {
        b.iter().map(|bj| digamma(bj + c)).sum::<f64>() - a.iter().map(|ai| digamma(1.0 - ai - c)).sum::<f64>() - ln_z
    };
    let mut left = lo;
    let mut right = if hi.is_finite() {
        hi
    } else {
        let mut r = lo + 1.0;
        while slope(r) < 0.0 {
            r = lo + 2.0 * (r - lo);
        }
        r
    };
    for _ in 0..200 {
        let mid = 0.5 * (left + right);
        if !(mid > left && mid < right) {
            break;
        }
        if slope(mid) < 0.0 {
            left = mid;
        } else {
            right = mid;
        }
    }
    let saddle = 0.5 * (left + right);
    let margin = if hi.is_finite() {
        (0.25 * (hi - lo)).min(0.5)
    } else {
        0.5
    };
    let mut c = saddle.max(lo + margin);
    if hi.is_finite() {
        c = c.min(hi - margin);
    }
    let dist = (c - lo).min(hi - c);

    let log_phi = |t: f64| -> Complex64 {
        let u = Complex64::new(c, t);
        let mut acc = -u * ln_z;
        for &bj in b {
            acc += ln_gamma_complex(u + bj);
        }
        for &ai in a {
            acc += ln_gamma_complex(Complex64::new(1.0 - ai, 0.0) - u);
        }
        acc
    };
    let peak = log_phi(0.0).re;
    let sample = |t: f64| -> (f64, f64) {
        let w = (log_phi(t) - peak).exp();
        (w.re, w.norm())
    };

    let mut h = dist / 4.0;
    // envelope |φ| is non-increasing in |t|, so the tail is cut once it is negligible
    let mut sum = 0.5 * sample(0.0).0;
    let mut abs_sum = 0.5;
    let mut n_nodes = 0usize;
    loop {
        n_nodes += 1;
        let (re, env) = sample(n_nodes as f64 * h);
        sum += re;
        abs_sum += env;
        if env < 1e-22 && n_nodes as f64 * h > dist {
            break;
        }
        if n_nodes > 2_000_000 {
            return Err(Error::MeijerG {
                z,
                msg: "contour integrand failed to decay".into(),
            });
        }
    }
    let t_max = n_nodes as f64 * h;
    let mut integral = sum * h;
    let mut converged = false;
    for _ in 0..10 {
        let half = 0.5 * h;
        let mut odd = 0.0;
        let mut k = 0usize;
        loop {
            let t = (2 * k + 1) as f64 * half;
            if t > t_max {
                break;
            }
            let (re, env) = sample(t);
            odd += re;
            abs_sum += env;
            k += 1;
        }
        let refined = 0.5 * integral + half * odd;
        let delta = (refined - integral).abs();
        integral = refined;
        h = half;
        if delta <= ctl.rel_tol * integral.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MeijerG {
            z,
            msg: "contour quadrature did not converge".into(),
        });
    }
    let cancellation = abs_sum * h / integral.abs();
    if !(cancellation < CONTOUR_MAX_CANCELLATION) {
        return Err(Error::MeijerG {
            z,
            msg: format!("contour integral lost precision (cancellation {cancellation:e})"),
        });
    }
    let mut value = LogValue::from_value(integral / PI);
    value.ln_abs += peak;
    Ok(MeijerEval {
        value,
        path: EvalPath::Contour,
        cancellation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::bessel_k;
    use crate::specfun::gamma::gamma;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn default_b() -> [f64; 5] {
        // α, β at Rytov variance 0.16
        let (al, be) = (14.110_873_888_160_07, 12.537_941_854_873_21);
        [al / 2.0, (al + 1.0) / 2.0, be / 2.0, (be + 1.0) / 2.0, 0.0]
    }

    #[test]
    fn unsupported_orders_rejected() {
        assert!(matches!(
            MeijerGOrder::new(3, 0, 0, 3, vec![], vec![1.0, 2.0, 3.0]),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(MeijerGOrder::new(5, 0, 0, 5, vec![], vec![1.0; 4]).is_err());
        assert!(MeijerGOrder::new(5, 1, 1, 5, vec![], vec![1.0; 5]).is_err());
    }

    #[test]
    fn overlapping_pole_families_rejected() {
        // 1 - a = -b_min  ⇒ no separating line
        assert!(MeijerGOrder::g51_15(2.0, [1.0, 1.5, 2.2, 3.1, -1.0]).is_err());
    }

    #[test]
    fn g20_02_bessel_identity_collision() {
        // (0.5, -0.5) differ by an integer: exercised through the ε route
        let o = MeijerGOrder::g20_02(0.5, -0.5).unwrap();
        let g = meijer_g(&o, 1.0, &SeriesControl::default()).unwrap();
        let want = 2.0 * bessel_k(1.0, 2.0).unwrap();
        assert!(rel(g, want) < 1e-9, "{g} vs {want}");
    }

    #[test]
    fn g50_05_zero_limit_is_gamma_product() {
        let b = default_b();
        let o = MeijerGOrder::g50_05(b).unwrap();
        let want: f64 = b[..4].iter().map(|&x| gamma(x).unwrap()).product();
        let g = meijer_g(&o, 1e-300, &SeriesControl::default()).unwrap();
        assert!(rel(g, want) < 1e-12);
        assert!(rel(meijer_g_small_z(&o, 0.0, 1).unwrap(), want) < 1e-12);
    }

    #[test]
    fn small_z_degenerate_zero_limit() {
        let o = MeijerGOrder::g50_05([1.0, 1.5, 2.0, 2.5, 0.0]).unwrap();
        let want = gamma(1.5).unwrap() * gamma(2.5).unwrap();
        assert!(rel(meijer_g_small_z(&o, 0.0, 1).unwrap(), want) < 1e-14);
    }

    #[test]
    fn small_z_matches_full_evaluator() {
        let o = MeijerGOrder::g50_05(default_b()).unwrap();
        let ctl = SeriesControl::default();
        for z in [1e-8, 1e-7, 1e-6] {
            let full = meijer_g(&o, z, &ctl).unwrap();
            let approx = meijer_g_small_z(&o, z, 1).unwrap();
            assert!(rel(approx, full) < 0.01, "z = {z}");
        }
        let o = MeijerGOrder::g50_05([1.0, 1.5, 2.0, 2.5, 0.0]).unwrap();
        let full = meijer_g(&o, 1e-8, &ctl).unwrap();
        let approx = meijer_g_small_z(&o, 1e-8, 1).unwrap();
        assert!(rel(approx, full) < 0.01);
    }

    #[test]
    fn small_z_more_terms_converge_to_full() {
        let o = MeijerGOrder::g50_05(default_b()).unwrap();
        let ctl = SeriesControl::default();
        let z = 0.5;
        let full = meijer_g(&o, z, &ctl).unwrap();
        let e1 = rel(meijer_g_small_z(&o, z, 1).unwrap(), full);
        let e3 = rel(meijer_g_small_z(&o, z, 3).unwrap(), full);
        assert!(e3 < e1 && e3 < 1e-9);
    }

    #[test]
    fn auto_route_switches_to_contour_for_large_z() {
        let o = MeijerGOrder::g50_05(default_b()).unwrap();
        let ctl = SeriesControl::default();
        assert_eq!(meijer_g_log(&o, 0.37, &ctl).unwrap().path, EvalPath::Series);
        assert_eq!(meijer_g_log(&o, 3e4, &ctl).unwrap().path, EvalPath::Contour);
    }

    #[test]
    fn series_and_contour_agree_on_overlap() {
        let ctl = SeriesControl::default();
        let orders = [
            MeijerGOrder::g50_05(default_b()).unwrap(),
            MeijerGOrder::g50_05([0.8, 1.3, 2.45, 2.95, 0.0]).unwrap(),
            MeijerGOrder::g51_15(-6.662, [0.393, 0.893, -0.393, 0.107, -6.662]).unwrap(),
            MeijerGOrder::g20_02(0.37, -0.37).unwrap(),
        ];
        for o in &orders {
            for z in [0.05, 0.3, 1.0, 3.0, 8.0] {
                let s = meijer_g_series(o, z, &ctl).unwrap().value.value();
                let c = meijer_g_contour(o, z, &ctl).unwrap().value.value();
                assert!(rel(s, c) < 1e-6, "{o:?} z = {z}: {s} vs {c}");
            }
        }
    }

    #[test]
    fn perturbation_is_stable_under_halving() {
        let o = MeijerGOrder::g50_05([1.0, 1.5, 2.0, 2.5, 0.0]).unwrap();
        for z in [1e-6, 1e-3, 0.02] {
            let mut ctl = SeriesControl::default();
            let a = meijer_g_series(&o, z, &ctl).unwrap().value.value();
            ctl.pole_eps /= 2.0;
            let b = meijer_g_series(&o, z, &ctl).unwrap().value.value();
            assert!(rel(a, b) < 1e-6, "z = {z}");
        }
    }

    #[test]
    fn collision_ladder_is_symmetric() {
        let off = collision_offsets(&[1.0, 1.5, 2.0, 2.5, 0.0], 1e-6).unwrap();
        assert_eq!(off[4], -1e-6);
        assert_eq!(off[0], 0.0);
        assert_eq!(off[2], 1e-6);
        assert_eq!(off[1], -0.5e-6);
        assert_eq!(off[3], 0.5e-6);
        assert!(collision_offsets(&default_b(), 1e-6).is_none());
    }

    #[test]
    fn non_positive_argument_rejected() {
        let o = MeijerGOrder::g50_05(default_b()).unwrap();
        assert!(meijer_g(&o, 0.0, &SeriesControl::default()).is_err());
        assert!(meijer_g(&o, -1.0, &SeriesControl::default()).is_err());
    }

    proptest! {
        #[test]
        fn g20_02_matches_bessel(z in 1e-3f64..10.0, nu in 0.0f64..5.0, shift in -1.0f64..1.0) {
            let (a, b) = (shift + nu / 2.0, shift - nu / 2.0);
            let o = MeijerGOrder::g20_02(a, b).unwrap();
            let g = meijer_g(&o, z, &SeriesControl::default()).unwrap();
            let want = 2.0 * z.powf((a + b) / 2.0) * bessel_k(nu, 2.0 * z.sqrt()).unwrap();
            prop_assert!(rel(g, want) < 1e-9, "a={} b={} z={} g={} want={}", a, b, z, g, want);
        }
    }
}
