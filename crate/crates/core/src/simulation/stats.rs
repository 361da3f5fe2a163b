use serde::{Deserialize, Serialize};

use crate::error::{Result, ZarError};

/// Six-number summary; quartiles use linear interpolation between order
/// statistics (type 7).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn descriptive_stats(values: &[f64]) -> Result<Descriptive> {
    if values.is_empty() {
        return Err(ZarError::InvalidData("descriptive statistics of an empty vector".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| crate::residuals::percentile_sorted(&sorted, p);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(Descriptive {
        min: sorted[0],
        q1: q(0.25),
        median: q(0.5),
        // Keep the mean inside [min, max] despite rounding.
        mean: mean.clamp(sorted[0], sorted[sorted.len() - 1]),
        q3: q(0.75),
        max: sorted[sorted.len() - 1],
    })
}
