//! Mean/dispersion parameterized continuous families, the zero-adjusted
//! mixture built from them, and the standard normal distribution.

mod family;
mod normal;
pub mod special;
mod zero_adjusted;

pub use family::{ContinuousFamily, MeanDispersionParams, Support};
pub use normal::{
    normal_cdf, normal_ln_cdf, normal_pdf, normal_quantile, normal_quantile_clamped, normal_sf,
    QUANTILE_CEIL, QUANTILE_FLOOR,
};
pub use zero_adjusted::{ZeroAdjusted, ZeroAdjustedParams};

pub(crate) use zero_adjusted::sample_unchecked;
