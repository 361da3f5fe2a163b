use crate::distributions::{normal_cdf, normal_quantile_clamped, normal_sf};
use crate::error::{Result, ZarError};

/// Maps a residual of the continuous part onto the scale of the whole
/// zero-adjusted response.
///
/// ```text
/// r* = Φ⁻¹[Φ(r)(1 − α)]          r < 0
/// r* = Φ⁻¹[α + Φ(r)(1 − α)]      r ≥ 0
/// ```
///
/// `r = 0` goes through the upper branch, so `r*` jumps from
/// `Φ⁻¹(0.5(1 − α))` to `Φ⁻¹(α + 0.5(1 − α))` there.
pub fn star_residual(r: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ZarError::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if r.is_nan() {
        return Err(ZarError::Domain("residual is NaN".into()));
    }
    Ok(star_unchecked(r, alpha))
}

pub(crate) fn star_unchecked(r: f64, alpha: f64) -> f64 {
    if r < 0.0 {
        normal_quantile_clamped(normal_cdf(r) * (1.0 - alpha))
    } else {
        // Upper branch through the survival side: 1 − [α + Φ(r)(1 − α)]
        // equals Φ(−r)(1 − α), which keeps full precision in the tail.
        -normal_quantile_clamped(normal_sf(r) * (1.0 - alpha))
    }
}
