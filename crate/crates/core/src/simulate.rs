//! Monte Carlo counterparts of the closed forms.
//!
//! (γ₁, γ₂) pairs are drawn from the channel samplers and pushed through the
//! SNDR map. Work is split into a fixed number of shards; shard `i` owns a
//! ChaCha8 stream `i` under the master seed, and shard accumulators are merged
//! in index order, so a (seed, shards) pair always reproduces the same bits
//! regardless of how rayon schedules the shards.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{BerParams, JensenForm, SystemConfig};
use crate::channel::{sample_gamma1, GgSampler};
use crate::error::{invalid, Result};
use crate::specfun::gamma_upper_reg;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SHARDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McRun {
    pub seed: u64,
    pub samples: u64,
    pub shards: usize,
}

impl Default for McRun {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: DEFAULT_SAMPLES,
            shards: DEFAULT_SHARDS,
        }
    }
}

impl McRun {
    pub fn new(seed: u64, samples: u64, shards: usize) -> Result<Self> {
        let run = Self { seed, samples, shards };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("samples", "need at least one sample"));
        }
        if self.shards == 0 {
            return Err(invalid("shards", "need at least one shard"));
        }
        Ok(())
    }

    /// Sample count of shard `i`; the remainder goes to the lowest indices.
    pub fn shard_len(&self, i: usize) -> u64 {
        let s = self.shards as u64;
        self.samples / s + u64::from((i as u64) < self.samples % s)
    }

    pub fn shard_rng(&self, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        rng
    }
}

/// Streaming count / mean / M2 accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let d = other.mean - self.mean;
        Moments {
            count: n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    fn from_moments(m: &Moments) -> Self {
        Self {
            mean: m.mean,
            stderr: m.stderr(),
            samples: m.count,
        }
    }

    /// |value − mean| ≤ max(k·stderr, floor).
    pub fn agrees(&self, value: f64, k: f64, floor: f64) -> bool {
        (value - self.mean).abs() <= (k * self.stderr).max(floor)
    }
}

/// Sharded streaming mean of `f(rng)`.
pub fn mc_mean<F>(run: &McRun, f: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    run.validate()?;
    let parts: Vec<Moments> = (0..run.shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = run.shard_rng(i);
            let mut m = Moments::default();
            for _ in 0..run.shard_len(i) {
                m.push(f(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::default(), |acc, m| acc.merge(m));
    Ok(Estimate::from_moments(&total))
}

/// Raw draws of `f(rng)`, concatenated in shard order.
pub fn mc_draws<F>(run: &McRun, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    run.validate()?;
    let parts: Vec<Vec<f64>> = (0..run.shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = run.shard_rng(i);
            (0..run.shard_len(i)).map(|_| f(&mut rng)).collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Mean of `g(γ₁, γ₂)` over the configured channel.
pub fn mc_channel_mean<G>(cfg: &SystemConfig, run: &McRun, g: G) -> Result<Estimate>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    let prs = *cfg.prs();
    let gg = GgSampler::new(cfg.fading())?;
    mc_mean(run, |rng| {
        let g1 = sample_gamma1(rng, &prs);
        let g2 = gg.sample(rng);
        g(g1, g2)
    })
}

/// Fraction of draws with SNDR < x; stderr is the binomial √(p(1−p)/n).
pub fn mc_outage(x: f64, cfg: &SystemConfig, run: &McRun) -> Result<Estimate> {
    if !(x > 0.0) {
        return Err(invalid("x", format!("outage threshold {x} must be > 0")));
    }
    let model = cfg.sndr_model()?;
    let e = mc_channel_mean(cfg, run, |a, b| f64::from(u8::from(model.eval(a, b) < x)))?;
    let n = e.samples as f64;
    Ok(Estimate {
        stderr: (e.mean * (1.0 - e.mean) / n).sqrt(),
        ..e
    })
}

/// Ergodic capacity under the configured convention.
pub fn mc_capacity(cfg: &SystemConfig, run: &McRun) -> Result<Estimate> {
    let model = cfg.sndr_model()?;
    let conv = *cfg.capacity_convention();
    mc_channel_mean(cfg, run, |a, b| conv.apply(model.eval(a, b)))
}

/// Sample mean of the J integrand γ₁γ₂ / (Aγ₂ + B).
pub fn mc_jensen_j(cfg: &SystemConfig, form: JensenForm, run: &McRun) -> Result<Estimate> {
    let ilr = cfg.ilr();
    let k = cfg.kappa()?;
    let b = (1.0 + ilr) * (cfg.prs_mean() + k);
    let a = match form {
        JensenForm::Bound => (1.0 + ilr) * k,
        JensenForm::ExtraLeakage => ilr + (1.0 + ilr) * k,
    };
    mc_channel_mean(cfg, run, |g1, g2| g1 * g2 / (a * g2 + b))
}

/// Average of the conditional error Γ(p, q·SNDR) / (2Γ(p)).
pub fn mc_ber(params: &BerParams, cfg: &SystemConfig, run: &McRun) -> Result<Estimate> {
    let BerParams { p, q } = BerParams::new(params.p, params.q)?;
    let model = cfg.sndr_model()?;
    mc_channel_mean(cfg, run, |a, b| ber_kernel(p, q, model.eval(a, b)))
}

/// Conditional BER of one SNDR value.
pub fn ber_kernel(p: f64, q: f64, sndr: f64) -> f64 {
    // p > 0 and q·sndr ≥ 0 here, so the domain checks cannot fire
    0.5 * gamma_upper_reg(p, q * sndr).unwrap_or(f64::NAN)
}

/// Exact one-sample Kolmogorov–Smirnov distance; sorts `samples`.
pub fn ks_distance<F: FnMut(f64) -> f64>(samples: &mut [f64], mut cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Upper bound on the KS distance using the CDF only at `cells` sample
/// quantiles. Monotonicity of both CDFs brackets the gap inside each cell,
/// so the bound exceeds the exact distance by at most one cell's mass.
pub fn ks_distance_bound<F: FnMut(f64) -> f64>(samples: &mut [f64], cells: usize, mut cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    let cells = cells.clamp(1, n);
    let nf = n as f64;
    // knot indices into the sorted sample, first and last included
    let idx: Vec<usize> = (0..=cells).map(|j| (j * (n - 1)) / cells).collect();
    let vals: Vec<f64> = idx.iter().map(|&i| cdf(samples[i])).collect();
    let mut d: f64 = 0.0;
    // below the smallest sample the ECDF is 0
    d = d.max(vals[0]);
    for j in 0..cells {
        let (lo, hi) = (idx[j], idx[j + 1]);
        // on [x_lo, x_hi) the ECDF runs from (lo+1)/n up to hi/n
        let ecdf_lo = (lo + 1) as f64 / nf;
        let ecdf_hi = hi.max(lo + 1) as f64 / nf;
        d = d.max(ecdf_hi - vals[j]).max(vals[j + 1] - ecdf_lo);
    }
    // at and above the largest sample the ECDF is 1
    d.max(1.0 - vals[cells]).max(vals[cells] - (n - 1) as f64 / nf)
}
