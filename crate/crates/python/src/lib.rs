//! Python bindings: scenario construction, closed forms, Monte Carlo and the
//! special functions underneath.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rfso_core::analytics::{self, BerParams, CapacityConvention, JensenForm, LinkParams};
use rfso_core::channel::{self, FadingParams, PrsParams};
use rfso_core::impairments::{self, HpaKind, HpaModel, IqImbalance, DEFAULT_PHI0};
use rfso_core::simulate;
use rfso_core::specfun::{self, MeijerGOrder, SeriesControl};
use rfso_core::{db_to_linear, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. }
        | Error::Domain { .. }
        | Error::GammaPole(_)
        | Error::UnsupportedOrder { .. }
        | Error::Config(_)
        | Error::NoCeiling => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn hpa_kind(name: &str) -> PyResult<HpaKind> {
    match name.to_ascii_lowercase().as_str() {
        "ideal" => Ok(HpaKind::Ideal),
        "sel" => Ok(HpaKind::Sel),
        "twta" => Ok(HpaKind::Twta),
        other => Err(PyValueError::new_err(format!(
            "unknown amplifier {other:?}; use ideal, sel or twta"
        ))),
    }
}

/// Full link scenario. Average SNRs are given in dB.
#[pyclass(name = "SystemConfig", module = "rfso", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystemConfig {
    inner: analytics::SystemConfig,
}

#[pymethods]
impl PySystemConfig {
    #[new]
    #[pyo3(signature = (
        relays = 5, rank = 2, rho = 0.9, rytov = 0.16, hpa = "sel", ibo_db = 0.0,
        ilr_db = Some(-15.0), snr_db = 20.0, snr2_db = None, phi0 = DEFAULT_PHI0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        relays: usize,
        rank: usize,
        rho: f64,
        rytov: f64,
        hpa: &str,
        ibo_db: f64,
        ilr_db: Option<f64>,
        snr_db: f64,
        snr2_db: Option<f64>,
        phi0: f64,
    ) -> PyResult<Self> {
        let s1 = db_to_linear(snr_db);
        let s2 = db_to_linear(snr2_db.unwrap_or(snr_db));
        let kind = hpa_kind(hpa)?;
        let model = match kind {
            HpaKind::Ideal => HpaModel::ideal(),
            k => HpaModel::new(k, db_to_linear(ibo_db), phi0, 1.0).map_err(py_err)?,
        };
        let iq = match ilr_db {
            Some(d) => IqImbalance::from_ilr(db_to_linear(d)).map_err(py_err)?,
            None => IqImbalance::ideal(),
        };
        let inner = analytics::SystemConfig::new(
            PrsParams::new(relays, rank, rho, s1).map_err(py_err)?,
            FadingParams::from_rytov(rytov, s2).map_err(py_err)?,
            model,
            iq,
            LinkParams::default(),
            CapacityConvention::default(),
        )
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Copy at a new average SNR (dB) on both hops, or each hop separately.
    #[pyo3(signature = (snr_db, snr2_db = None))]
    fn with_snr_db(&self, snr_db: f64, snr2_db: Option<f64>) -> PyResult<Self> {
        let inner = self
            .inner
            .with_snr(db_to_linear(snr_db), db_to_linear(snr2_db.unwrap_or(snr_db)))
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    fn ideal(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_ideal_hardware().map_err(py_err)?,
        })
    }

    #[getter]
    fn ilr(&self) -> f64 {
        self.inner.ilr()
    }

    #[getter]
    fn kappa(&self) -> PyResult<f64> {
        self.inner.kappa().map_err(py_err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.fading().alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.fading().beta
    }

    /// (δ, σ_d², ξ) of the relay amplifier.
    #[getter]
    fn bussgang(&self) -> (f64, f64, f64) {
        let c = self.inner.coeffs();
        (c.delta, c.sigma_d2, c.xi)
    }

    fn sndr(&self, g1: f64, g2: f64) -> PyResult<f64> {
        analytics::sndr(g1, g2, &self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let p = self.inner.prs();
        format!(
            "SystemConfig(N={}, m={}, rho={}, alpha={:.4}, beta={:.4}, hpa={:?}, ilr={:.4e}, snr1={:.4e}, snr2={:.4e})",
            p.relays,
            p.rank,
            p.rho,
            self.inner.fading().alpha,
            self.inner.fading().beta,
            self.inner.hpa().kind,
            self.inner.ilr(),
            p.mean_snr,
            self.inner.fading().mean_snr
        )
    }
}

/// Monte Carlo budget: master seed, sample count, shard count.
#[pyclass(name = "McRun", module = "rfso", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyMcRun {
    inner: simulate::McRun,
}

#[pymethods]
impl PyMcRun {
    #[new]
    #[pyo3(signature = (seed = 1, samples = simulate::DEFAULT_SAMPLES, shards = simulate::DEFAULT_SHARDS))]
    fn new(seed: u64, samples: u64, shards: usize) -> PyResult<Self> {
        Ok(Self {
            inner: simulate::McRun::new(seed, samples, shards).map_err(py_err)?,
        })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn samples(&self) -> u64 {
        self.inner.samples
    }

    #[getter]
    fn shards(&self) -> usize {
        self.inner.shards
    }
}

#[pyclass(name = "Estimate", module = "rfso", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyEstimate {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    stderr: f64,
    #[pyo3(get)]
    samples: u64,
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(mean={:e}, stderr={:e}, samples={})",
            self.mean, self.stderr, self.samples
        )
    }
}

impl From<simulate::Estimate> for PyEstimate {
    fn from(e: simulate::Estimate) -> Self {
        Self {
            mean: e.mean,
            stderr: e.stderr,
            samples: e.samples,
        }
    }
}

fn jensen_form(name: &str) -> PyResult<JensenForm> {
    match name {
        "bound" => Ok(JensenForm::Bound),
        "extra_leakage" => Ok(JensenForm::ExtraLeakage),
        other => Err(PyValueError::new_err(format!("unknown J form {other:?}"))),
    }
}

#[pyfunction]
fn outage(x: f64, cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::outage(x, &cfg.inner).map_err(py_err)
}

#[pyfunction]
fn outage_high_snr(x: f64, cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::outage_high_snr(x, &cfg.inner).map_err(py_err)
}

#[pyfunction]
fn diversity_gain(cfg: &PySystemConfig) -> f64 {
    analytics::diversity_gain(&cfg.inner)
}

#[pyfunction]
fn capacity_approx(cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::capacity_approx(&cfg.inner).map_err(py_err)
}

#[pyfunction]
fn sndr_star(cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::sndr_star(&cfg.inner).map_err(py_err)
}

#[pyfunction]
fn capacity_ceiling(cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::capacity_ceiling(&cfg.inner).map_err(py_err)
}

#[pyfunction]
fn jensen_j(cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::jensen_j(&cfg.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, form = "bound"))]
fn jensen_j_quadrature(cfg: &PySystemConfig, form: &str) -> PyResult<f64> {
    analytics::jensen_j_quadrature(&cfg.inner, jensen_form(form)?).map_err(py_err)
}

#[pyfunction]
fn jensen_bound(cfg: &PySystemConfig) -> PyResult<f64> {
    analytics::jensen_bound(&cfg.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, p = 1.0, q = 1.0))]
fn ber(cfg: &PySystemConfig, p: f64, q: f64) -> PyResult<f64> {
    let b = BerParams::new(p, q).map_err(py_err)?;
    analytics::ber(&b, &cfg.inner).map_err(py_err)
}

#[pyfunction]
fn mc_outage(py: Python<'_>, x: f64, cfg: &PySystemConfig, run: &PyMcRun) -> PyResult<PyEstimate> {
    let (c, r) = (cfg.inner.clone(), run.inner);
    py.detach(move || simulate::mc_outage(x, &c, &r))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn mc_capacity(py: Python<'_>, cfg: &PySystemConfig, run: &PyMcRun) -> PyResult<PyEstimate> {
    let (c, r) = (cfg.inner.clone(), run.inner);
    py.detach(move || simulate::mc_capacity(&c, &r))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, run, form = "bound"))]
fn mc_jensen_j(py: Python<'_>, cfg: &PySystemConfig, run: &PyMcRun, form: &str) -> PyResult<PyEstimate> {
    let (c, r, f) = (cfg.inner.clone(), run.inner, jensen_form(form)?);
    py.detach(move || simulate::mc_jensen_j(&c, f, &r))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, run, p = 1.0, q = 1.0))]
fn mc_ber(py: Python<'_>, cfg: &PySystemConfig, run: &PyMcRun, p: f64, q: f64) -> PyResult<PyEstimate> {
    let b = BerParams::new(p, q).map_err(py_err)?;
    let (c, r) = (cfg.inner.clone(), run.inner);
    py.detach(move || simulate::mc_ber(&b, &c, &r))
        .map(Into::into)
        .map_err(py_err)
}

/// G^{m,n}_{p,q}(z) for the supported orders (2,0,0,2), (5,0,0,5), (5,1,1,5).
#[pyfunction]
fn meijer_g(m: usize, n: usize, p: usize, q: usize, a: Vec<f64>, b: Vec<f64>, z: f64) -> PyResult<f64> {
    let order = MeijerGOrder::new(m, n, p, q, a, b).map_err(py_err)?;
    specfun::meijer_g(&order, z, &SeriesControl::default()).map_err(py_err)
}

#[pyfunction]
fn bessel_k(nu: f64, x: f64) -> PyResult<f64> {
    specfun::bessel_k(nu, x).map_err(py_err)
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).map_err(py_err)
}

#[pyfunction]
fn gamma_upper_reg(p: f64, x: f64) -> PyResult<f64> {
    specfun::gamma_upper_reg(p, x).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, relays = 5, rank = 2, rho = 0.9, mean_snr = 1.0))]
fn prs_cdf(x: f64, relays: usize, rank: usize, rho: f64, mean_snr: f64) -> PyResult<f64> {
    let p = PrsParams::new(relays, rank, rho, mean_snr).map_err(py_err)?;
    channel::prs_cdf(x, &p).map_err(py_err)
}

#[pyfunction]
fn gg_pdf(x: f64, alpha: f64, beta: f64, mean_snr: f64) -> PyResult<f64> {
    let f = FadingParams::new(alpha, beta, mean_snr).map_err(py_err)?;
    channel::gg_pdf(x, &f).map_err(py_err)
}

#[pyfunction]
fn rytov_to_shapes(rytov: f64) -> PyResult<(f64, f64)> {
    channel::rytov_to_shapes(rytov).map_err(py_err)
}

/// (δ, σ_d², ξ) for an amplifier at unit input power; IBO in dB.
#[pyfunction]
#[pyo3(signature = (kind, ibo_db, phi0 = DEFAULT_PHI0))]
fn bussgang(kind: &str, ibo_db: f64, phi0: f64) -> PyResult<(f64, f64, f64)> {
    let model = match hpa_kind(kind)? {
        HpaKind::Ideal => HpaModel::ideal(),
        k => HpaModel::new(k, db_to_linear(ibo_db), phi0, 1.0).map_err(py_err)?,
    };
    let c = impairments::bussgang(&model).map_err(py_err)?;
    Ok((c.delta, c.sigma_d2, c.xi))
}

/// (points, failures) after checking a fixture directory.
#[pyfunction]
fn validate_fixtures(dir: std::path::PathBuf) -> PyResult<(usize, usize)> {
    let r = rfso_core::fixtures::validate_fixtures(&dir).map_err(py_err)?;
    Ok((r.checks.len(), r.failures().count()))
}

#[pymodule]
fn rfso(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemConfig>()?;
    m.add_class::<PyMcRun>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(outage, m)?)?;
    m.add_function(wrap_pyfunction!(outage_high_snr, m)?)?;
    m.add_function(wrap_pyfunction!(diversity_gain, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_approx, m)?)?;
    m.add_function(wrap_pyfunction!(sndr_star, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_ceiling, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_j, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_j_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_bound, m)?)?;
    m.add_function(wrap_pyfunction!(ber, m)?)?;
    m.add_function(wrap_pyfunction!(mc_outage, m)?)?;
    m.add_function(wrap_pyfunction!(mc_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(mc_jensen_j, m)?)?;
    m.add_function(wrap_pyfunction!(mc_ber, m)?)?;
    m.add_function(wrap_pyfunction!(meijer_g, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_upper_reg, m)?)?;
    m.add_function(wrap_pyfunction!(prs_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gg_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(rytov_to_shapes, m)?)?;
    m.add_function(wrap_pyfunction!(bussgang, m)?)?;
    m.add_function(wrap_pyfunction!(validate_fixtures, m)?)?;
    Ok(())
}
