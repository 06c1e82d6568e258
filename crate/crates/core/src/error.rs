use thiserror::Error;

/// Errors produced by the numerical core and the batch front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole of the gamma function at x = {0}")]
    GammaPole(f64),

    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("unsupported Meijer-G order G^{{{m},{n}}}_{{{p},{q}}}")]
    UnsupportedOrder { m: usize, n: usize, p: usize, q: usize },

    #[error("Meijer-G evaluation failed at z = {z}: {msg}")]
    MeijerG { z: f64, msg: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("closed-form value {value} outside [0, 1] in {func}")]
    OutOfRange { func: &'static str, value: f64 },

    #[error("no capacity ceiling: hardware is ideal")]
    NoCeiling,

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("no fixtures found in {0}")]
    NoFixtures(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, msg: impl Into<String>) -> Error {
    Error::InvalidParameter { name, msg: msg.into() }
}

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { func, msg: msg.into() }
}
