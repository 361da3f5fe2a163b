//! Standard normal distribution function and its inverse.

use super::special::{gamma_inc, ln_gamma_q};
use crate::error::{Result, ZarError};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Smallest probability passed to the inverse; smaller inputs are clamped.
pub const QUANTILE_FLOOR: f64 = 1e-300;
/// Largest probability passed to the inverse; larger inputs are clamped.
pub const QUANTILE_CEIL: f64 = 1.0 - 1e-16;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    // Φ(x) = Q(1/2, x²/2) / 2 for x < 0
    let (_, q) = gamma_inc(0.5, 0.5 * x * x);
    if x < 0.0 {
        0.5 * q
    } else {
        1.0 - 0.5 * q
    }
}

/// 1 − Φ(x), computed without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// ln Φ(x), accurate far into the lower tail.
pub fn normal_ln_cdf(x: f64) -> f64 {
    if x < -5.0 {
        ln_gamma_q(0.5, 0.5 * x * x) - std::f64::consts::LN_2
    } else if x > 5.0 {
        (-normal_sf(x)).ln_1p()
    } else {
        normal_cdf(x).ln()
    }
}

/// Φ⁻¹(q) for `q` in the open unit interval.
///
/// Inputs in `(0, 1e-300)` and `(1 − 1e-16, 1)` are clamped to those bounds.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(ZarError::Domain(format!(
            "normal quantile requires 0 < q < 1, got {q}"
        )));
    }
    Ok(normal_quantile_clamped(q))
}

/// Φ⁻¹ that clamps every input into `[QUANTILE_FLOOR, QUANTILE_CEIL]`,
/// including 0 and 1. NaN propagates.
pub fn normal_quantile_clamped(q: f64) -> f64 {
    if q.is_nan() {
        return f64::NAN;
    }
    let q = q.clamp(QUANTILE_FLOOR, QUANTILE_CEIL);
    if q > 0.5 {
        -lower_quantile(1.0 - q)
    } else {
        lower_quantile(q)
    }
}

// Acklam's rational approximation followed by one Halley step. Only called
// with q <= 0.5 so that Φ(x) − q is evaluated in the tail that has full
// relative precision.
fn lower_quantile(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if q == 0.5 {
        return 0.0;
    }
    let x = if q < P_LOW {
        let t = (-2.0 * q.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    } else {
        let t = q - 0.5;
        let r = t * t;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * t
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - q;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}
