//! Special functions used by the closed forms.

mod bessel;
mod gamma;
mod meijer;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use gamma::{digamma, erfc, gamma, gamma_lower_reg, gamma_upper_reg, ln_gamma_complex, ln_gamma_signed};
pub use meijer::{
    meijer_g, meijer_g_contour, meijer_g_log, meijer_g_series, meijer_g_small_z, EvalPath, LogValue, MeijerEval,
    MeijerGOrder, SeriesControl,
};
