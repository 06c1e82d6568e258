//! Performance analysis of mixed RF/FSO amplify-and-forward relaying with
//! partial relay selection, outdated CSI, nonlinear relay amplifiers and IQ
//! imbalance at the destination.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: gamma family, Bessel K, Meijer-G evaluators.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature.
//! - [`channel`]: correlated-Rayleigh PRS first hop and Gamma-Gamma second hop.
//! - [`impairments`]: SEL/TWTA Bussgang coefficients, relay gain, IQ imbalance.
//! - [`analytics`]: closed-form outage, capacity bounds, diversity, BER.
//! - [`simulate`]: sharded Monte Carlo counterparts of every closed form.
//! - [`fixtures`]: golden-value files and their validation.
//! - [`cli`]: scenario files, sweeps, CSV and JSON reports.
// Coefficient tables keep their published digits; `!(x > 0.0)` is how
// validators reject NaN along with the bad range.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod channel;
pub mod cli;
mod error;
pub mod fixtures;
pub mod impairments;
pub mod quad;
pub mod simulate;
pub mod specfun;

pub use error::{Error, Result};

/// Decibel to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to decibel.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn db_round_trip(db in -100.0f64..100.0) {
            let back = linear_to_db(db_to_linear(db));
            prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
        }
    }
}
