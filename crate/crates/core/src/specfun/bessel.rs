//! Modified Bessel function of the second kind K_ν(x) for real order.
//!
//! The order is split as ν = n + μ with |μ| ≤ 1/2. K_μ and K_{μ+1} come from
//! Temme's series for x < 2 and from Steed's continued fraction otherwise,
//! then forward recurrence (stable for K) climbs to K_ν.

use std::f64::consts::PI;

use super::gamma::RGAMMA_TAYLOR;
use crate::error::{domain, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const TEMME_LIMIT: f64 = 2.0;

/// K_ν(x), x > 0, any real ν.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)? * (-x).exp())
}

/// e^x · K_ν(x). Avoids underflow for large x.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("bessel_k", format!("x = {x} must be > 0")));
    }
    if !nu.is_finite() {
        return Err(domain("bessel_k", "order must be finite"));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k_mu, mut k_mu1) = if x < TEMME_LIMIT { temme(mu, x)? } else { steed(mu, x)? };
    let two_over_x = 2.0 / x;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * two_over_x * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok(k_mu)
}

/// ln K_ν(x), usable far beyond the range where K_ν(x) underflows.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)?.ln() - x)
}

/// (Γ₁, Γ₂, 1/Γ(1+μ), 1/Γ(1-μ)) from the Taylor series of 1/Γ.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ c_k μ^{k-1}
    let mut odd = 0.0; // Σ c_k μ^{k-1}, k odd (even powers)
    let mut even = 0.0; // Σ c_k μ^{k-2}, k even
    let mu2 = mu * mu;
    for k in (1..RGAMMA_TAYLOR.len()).rev() {
        if k % 2 == 1 {
            odd = odd * mu2 + RGAMMA_TAYLOR[k];
        } else {
            even = even * mu2 + RGAMMA_TAYLOR[k];
        }
    }
    let gampl = odd + mu * even;
    let gammi = odd - mu * even;
    (-even, odd, gampl, gammi)
}

fn temme(mu: f64, x: f64) -> Result<(f64, f64)> {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            let scale = x.exp();
            return Ok((sum * scale, sum1 * (2.0 / x) * scale));
        }
    }
    Err(domain("bessel_k", "Temme series did not converge"))
}

/// Steed's method for the CF2 continued fraction; returns scaled values.
fn steed(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            h *= a1;
            let k_mu = (PI / (2.0 * x)).sqrt() / s;
            let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
            return Ok((k_mu, k_mu1));
        }
    }
    Err(domain("bessel_k", "continued fraction did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_closed_form() {
        let want = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!(rel(bessel_k(0.5, 1.0).unwrap(), want) < 1e-14);
        // K_{3/2}(x) = √(π/2x) e^{-x} (1 + 1/x)
        for x in [0.3, 1.7, 4.0, 33.0] {
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x).unwrap(), want) < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn order_symmetry() {
        assert_eq!(bessel_k(-2.0, 3.0).unwrap(), bessel_k(2.0, 3.0).unwrap());
    }

    #[test]
    fn high_precision_references() {
        // 40-digit references
        assert!(rel(bessel_k(1.58, 2.2).unwrap(), 0.142_508_769_301_089_784_4) < 1e-12);
        assert!(rel(2.0 * bessel_k(1.0, 2.0).unwrap(), 0.279_731_763_633_044_854_6) < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -2.0).is_err());
    }

    #[test]
    fn branch_continuity_at_temme_limit() {
        for nu in [0.0, 0.3, 1.2, 7.7] {
            let lo = bessel_k(nu, TEMME_LIMIT * (1.0 - 1e-12)).unwrap();
            let hi = bessel_k(nu, TEMME_LIMIT).unwrap();
            assert!(rel(lo, hi) < 1e-11, "nu = {nu}");
        }
    }

    proptest! {
        // K_{ν-1} - K_{ν+1} = -(2ν/x) K_ν
        #[test]
        fn three_term_recurrence(nu in 1.0f64..20.0, x in 0.05f64..40.0) {
            let km = bessel_k(nu - 1.0, x).unwrap();
            let k0 = bessel_k(nu, x).unwrap();
            let kp = bessel_k(nu + 1.0, x).unwrap();
            let lhs = kp - km;
            let rhs = 2.0 * nu / x * k0;
            prop_assert!(rel(lhs, rhs) < 1e-11);
        }

        // Wronskian-free check against the integral K_ν(x) = ∫₀^∞ e^{-x cosh t} cosh(νt) dt
        #[test]
        fn integral_representation(nu in 0.0f64..5.0, x in 0.2f64..20.0) {
            let h = 0.01f64;
            let mut acc = 0.5 * (-x).exp();
            let mut t = h;
            loop {
                let v = (-x * t.cosh()).exp() * (nu * t).cosh();
                acc += v;
                if v < 1e-20 * acc { break; }
                t += h;
            }
            prop_assert!(rel(bessel_k(nu, x).unwrap(), acc * h) < 1e-10);
        }
    }
}
