//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are never captured. The
//! process fails if a criterion fails that is not listed in
//! `EXPECTED_FAILURES`; those are reported as failures but are known,
//! documented limits of the model (see README).

use std::path::PathBuf;
use std::time::Instant;

use rfso_core::analytics::{
    self, capacity_approx, capacity_ceiling, fitted_diversity, jensen_bound, jensen_j, jensen_j_printed,
    jensen_j_quadrature, BerParams, JensenForm, SystemConfig,
};
use rfso_core::channel::{gg_cdf, prs_cdf, sample_gamma1, FadingParams, GgSampler, PrsParams};
use rfso_core::db_to_linear;
use rfso_core::fixtures::validate_fixtures;
use rfso_core::impairments::HpaModel;
use rfso_core::simulate::{self, ks_distance, ks_distance_bound, mc_draws, McRun};

const EXPECTED_FAILURES: &[&str] = &["capacity_ceiling"];

const SAMPLES: u64 = 1_000_000;
const SHARDS: usize = 16;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome, rfso_core::Error>;

fn run(seed: u64) -> McRun {
    McRun::new(seed, SAMPLES, SHARDS).unwrap()
}

fn defaults(db: f64) -> SystemConfig {
    SystemConfig::defaults(db_to_linear(db)).unwrap()
}

fn twta(db: f64) -> SystemConfig {
    defaults(db).with_hpa(HpaModel::twta(1.0).unwrap()).unwrap()
}

fn x10() -> f64 {
    db_to_linear(10.0)
}

fn special_functions() -> Result<Outcome, rfso_core::Error> {
    let t = Instant::now();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let r = validate_fixtures(&dir)?;
    let secs = t.elapsed().as_secs_f64();
    let worst = r.checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(Outcome {
        pass: r.passed() && r.checks.len() >= 200 && secs < 10.0,
        detail: format!(
            "{} points, {} failed, worst rel err {worst:.2e}, {secs:.2}s",
            r.checks.len(),
            r.failures().count()
        ),
    })
}

fn sampler_ks() -> Result<Outcome, rfso_core::Error> {
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, rho) in [0.0, 0.9, 1.0].into_iter().enumerate() {
        let p = PrsParams::new(5, 2, rho, 1.0)?;
        let mut xs = mc_draws(&run(100 + i as u64), |rng| sample_gamma1(rng, &p))?;
        let d = ks_distance(&mut xs, |x| prs_cdf(x, &p).unwrap_or(f64::NAN));
        worst = worst.max(d);
        parts.push(format!("rho={rho}: {d:.5}"));
    }
    let f = FadingParams::from_rytov(0.16, 1.0)?;
    let gg = GgSampler::new(&f)?;
    let mut ys = mc_draws(&run(200), |rng| gg.sample(rng))?;
    let d = ks_distance_bound(&mut ys, 10_000, |x| gg_cdf(x, &f).unwrap_or(f64::NAN));
    worst = worst.max(d);
    parts.push(format!("gamma-gamma (upper bound): {d:.5}"));
    Ok(Outcome {
        pass: worst <= 0.002,
        detail: parts.join(", "),
    })
}

fn outage_cross_check() -> Result<Outcome, rfso_core::Error> {
    let mut bad = Vec::new();
    let mut worst_sigma: f64 = 0.0;
    for (name, make) in [("SEL", defaults as fn(f64) -> SystemConfig), ("TWTA", twta)] {
        for db in [0.0, 10.0, 20.0, 30.0, 40.0] {
            let cfg = make(db);
            let p = analytics::outage(x10(), &cfg)?;
            let e = simulate::mc_outage(x10(), &cfg, &run(300 + db as u64))?;
            if e.stderr > 0.0 {
                worst_sigma = worst_sigma.max((p - e.mean).abs() / e.stderr);
            }
            if !e.agrees(p, 3.0, 1e-4) {
                bad.push(format!("{name} {db} dB: {p:.6} vs {:.6}±{:.1e}", e.mean, e.stderr));
            }
        }
    }
    Ok(Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("10 points, worst |diff| = {worst_sigma:.2} stderr")
        } else {
            bad.join("; ")
        },
    })
}

fn outage_floor() -> Result<Outcome, rfso_core::Error> {
    let a = analytics::outage(x10(), &defaults(50.0))?;
    let b = analytics::outage(x10(), &defaults(70.0))?;
    let rel = (a - b).abs() / a;
    let ta = analytics::outage(x10(), &twta(50.0))?;
    let tb = analytics::outage(x10(), &twta(70.0))?;
    Ok(Outcome {
        pass: rel <= 1e-3,
        detail: format!("SEL 50 dB {a:.6}, 70 dB {b:.6}, rel change {rel:.2e}; TWTA {ta:.6} -> {tb:.6}"),
    })
}

fn diversity_slope() -> Result<Outcome, rfso_core::Error> {
    let grid = [40.0, 45.0, 50.0, 55.0, 60.0];
    let ideal = defaults(0.0).with_ideal_hardware()?;
    let full = ideal.with_prs(PrsParams::new(5, 2, 1.0, 1.0)?)?;
    let s1 = fitted_diversity(x10(), &ideal, &grid, false)?;
    let s2 = fitted_diversity(x10(), &full, &grid, false)?;
    let (d1, d2) = (analytics::diversity_gain(&ideal), analytics::diversity_gain(&full));
    Ok(Outcome {
        pass: (s1 - d1).abs() <= 0.1 && (s2 - d2).abs() <= 0.1 && d1 == 1.0 && d2 == 2.0,
        detail: format!("rho=0.9: fit {s1:.4} vs {d1}; rho=1, m=2: fit {s2:.4} vs {d2}"),
    })
}

fn capacity_ceiling_check() -> Result<Outcome, rfso_core::Error> {
    let cfg = defaults(70.0);
    let e = simulate::mc_capacity(&cfg, &run(400))?;
    let ceil = capacity_ceiling(&cfg)?;
    let rel = (e.mean - ceil).abs() / ceil;
    let lin = cfg.with_hpa(HpaModel::sel(db_to_linear(60.0))?)?;
    let el = simulate::mc_capacity(&lin, &run(401))?;
    let conv = lin.capacity_convention();
    let anchor = conv.apply(1.0 / lin.ilr());
    let rel_lin = (el.mean - anchor).abs() / anchor;
    Ok(Outcome {
        pass: rel <= 0.03 && rel_lin <= 0.01,
        detail: format!(
            "IBO 0 dB: MC {:.4} vs ceiling {ceil:.4} (rel {:.1}%, need 3%); IBO 60 dB: MC {:.4} vs {anchor:.4} (rel {:.2}%, need 1%)",
            e.mean,
            100.0 * rel,
            el.mean,
            100.0 * rel_lin
        ),
    })
}

fn bound_dominance() -> Result<Outcome, rfso_core::Error> {
    let mut ok = true;
    let mut rows = Vec::new();
    for db in [10.0, 20.0, 30.0, 40.0, 50.0] {
        let cfg = defaults(db);
        let e = simulate::mc_capacity(&cfg, &run(500 + db as u64))?;
        let jb = jensen_bound(&cfg)?;
        ok &= jb >= e.mean - 3.0 * e.stderr;
        let approx = capacity_approx(&cfg)?;
        rows.push(format!(
            "{db} dB: mc {:.4} jensen {jb:.4} approx-mc {:+.4}",
            e.mean,
            approx - e.mean
        ));
    }
    let cfg = defaults(20.0);
    let jc = jensen_j(&cfg)?;
    let jq = jensen_j_quadrature(&cfg, JensenForm::Bound)?;
    let jp = jensen_j_printed(&cfg)?;
    let rel = (jc - jq).abs() / jq;
    ok &= rel <= 0.01;
    rows.push(format!(
        "J closed {jc:.6} vs quadrature {jq:.6} (rel {rel:.1e}); as typeset {jp:.6} (x{:.3})",
        jp / jq
    ));
    Ok(Outcome {
        pass: ok,
        detail: rows.join("; "),
    })
}

fn severity() -> Result<Outcome, rfso_core::Error> {
    let mut bad = Vec::new();
    for i in 0..=14 {
        let db = 5.0 * i as f64;
        let (s, t) = (defaults(db), twta(db));
        let (ps, pt) = (analytics::outage(x10(), &s)?, analytics::outage(x10(), &t)?);
        if pt < ps {
            bad.push(format!("outage {db} dB: TWTA {pt} < SEL {ps}"));
        }
        // common random numbers: both amplifiers see the same channel draws
        let r = run(600 + i);
        let (cs, ct) = (simulate::mc_capacity(&s, &r)?, simulate::mc_capacity(&t, &r)?);
        if ct.mean > cs.mean {
            bad.push(format!("capacity {db} dB: TWTA {:.5} > SEL {:.5}", ct.mean, cs.mean));
        }
        if capacity_approx(&t)? > capacity_approx(&s)? {
            bad.push(format!("approx capacity {db} dB"));
        }
    }
    Ok(Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "15 grid points, 0..70 dB, ordering holds".into()
        } else {
            bad.join("; ")
        },
    })
}

fn rho_rank() -> Result<Outcome, rfso_core::Error> {
    let base = defaults(20.0);
    let mut line = Vec::new();
    let mut ok = true;
    for rho in [1.0, 0.0] {
        let mut caps = Vec::new();
        for m in 1..=5 {
            let cfg = base.with_prs(PrsParams::new(5, m, rho, db_to_linear(20.0))?)?;
            caps.push(simulate::mc_capacity(&cfg, &run(700))?);
        }
        for w in caps.windows(2) {
            let slack = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            if rho == 1.0 {
                ok &= w[1].mean >= w[0].mean - slack;
            } else {
                ok &= (w[1].mean - caps[0].mean).abs() <= slack;
            }
        }
        let vals: Vec<String> = caps.iter().map(|e| format!("{:.4}", e.mean)).collect();
        line.push(format!("rho={rho}: [{}]", vals.join(", ")));
    }
    Ok(Outcome {
        pass: ok,
        detail: line.join("; "),
    })
}

fn ber_floor() -> Result<Outcome, rfso_core::Error> {
    let b = BerParams::new(1.0, 1.0)?;
    let cfg = defaults(60.0);
    let cf = analytics::ber(&b, &cfg)?;
    let e = simulate::mc_ber(&b, &cfg, &run(800))?;
    let agree = e.agrees(cf, 3.0, 0.0);
    let mut last = f64::INFINITY;
    let mut mono = true;
    let mut vals = Vec::new();
    for i in 0..=7 {
        let v = analytics::ber(&b, &defaults(10.0 * i as f64))?;
        mono &= v <= last * (1.0 + 1e-9);
        last = v;
        vals.push(format!("{v:.3e}"));
    }
    Ok(Outcome {
        pass: agree && mono,
        detail: format!(
            "60 dB: closed {cf:.6e} vs mc {:.6e}±{:.1e}; sweep 0..70 dB [{}]",
            e.mean,
            e.stderr,
            vals.join(", ")
        ),
    })
}

fn main() {
    // `cargo test -- --list` and filters: nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let checks: [(&str, Check); 10] = [
        ("special_functions", special_functions),
        ("sampler_ks", sampler_ks),
        ("outage_cross_check", outage_cross_check),
        ("outage_floor", outage_floor),
        ("diversity_slope", diversity_slope),
        ("capacity_ceiling", capacity_ceiling_check),
        ("bound_dominance", bound_dominance),
        ("sel_vs_twta_severity", severity),
        ("rho_rank_interaction", rho_rank),
        ("ber_floor", ber_floor),
    ];
    let mut unexpected = Vec::new();
    for (name, check) in checks {
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = t.elapsed().as_secs_f64();
        let known = EXPECTED_FAILURES.contains(&name);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known limitation)",
            (false, false) => "FAIL",
        };
        println!("{tag} {name} [{secs:.1}s]: {detail}");
        if !pass && !known {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance failures: {unexpected:?}");
        std::process::exit(1);
    }
}
