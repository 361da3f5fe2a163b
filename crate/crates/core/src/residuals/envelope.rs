//! Half-normal plots with simulated envelopes.
//!
//! Each replicate simulates a response from the fitted model, refits the
//! same specification and records the sorted absolute residuals. The band
//! at each order statistic is taken across replicates.
//!
//! Residuals defined at every observation (randomized quantile, binary)
//! are simulated from the full mixture. Residuals of the continuous part
//! keep the observed zero pattern and simulate only the positive rows, so
//! every replicate has the same number of defined values as the data.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute, ResidualKind};
use crate::distributions::{normal_quantile_clamped, sample_unchecked};
use crate::error::{Result, ZarError};
use crate::model::{Dataset, FitOptions, Fitter, StartStrategy, ZarFit};
use crate::rng::substream;

/// Smallest replicate count accepted.
pub const MIN_REPLICATES: usize = 19;
/// Largest share of replicates that may fail before the envelope is refused.
pub const MAX_DROPPED_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    /// Lower and upper percentiles in (0, 100).
    Percentile { lower: f64, upper: f64 },
    /// Smallest and largest replicate value.
    MinMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    pub replicates: usize,
    pub band: Band,
    pub seed: u64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { replicates: 100, band: Band::Percentile { lower: 2.5, upper: 97.5 }, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    /// 1-based order index.
    pub index: usize,
    pub score: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: ResidualKind,
    pub rows: Vec<EnvelopeRow>,
    pub replicates_used: usize,
    pub replicates_dropped: usize,
}

impl Envelope {
    /// Share of observed values inside `[lower, upper]`.
    pub fn coverage(&self) -> f64 {
        let inside = self.rows.iter().filter(|r| r.observed >= r.lower && r.observed <= r.upper).count();
        inside as f64 / self.rows.len().max(1) as f64
    }
}

/// Half-normal scores `Φ⁻¹((i + n − 1/8)/(2n + 1/2))`, `i = 1..n`.
pub fn halfnormal_scores(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..=n)
        .map(|i| normal_quantile_clamped((i as f64 + nf - 0.125) / (2.0 * nf + 0.5)))
        .collect()
}

/// Builds a half-normal envelope for residuals of `kind`.
///
/// `data` must hold the covariates the fit was made with. Replicates run
/// on the current rayon pool; replicate `b` draws from sub-stream `b + 1`
/// of `opts.seed` (sub-stream 0 is the observed randomized residual), so
/// the result does not depend on the number of workers.
pub fn halfnormal_envelope(
    fit: &ZarFit,
    data: &Dataset,
    kind: ResidualKind,
    opts: &EnvelopeOptions,
) -> Result<Envelope> {
    if opts.replicates < MIN_REPLICATES {
        return Err(ZarError::InvalidSpec(format!(
            "an envelope needs at least {MIN_REPLICATES} replicates, got {}",
            opts.replicates
        )));
    }
    if let Band::Percentile { lower, upper } = opts.band {
        if !(0.0 <= lower && lower < upper && upper <= 100.0) {
            return Err(ZarError::InvalidSpec(format!("invalid percentile band {lower}/{upper}")));
        }
    }

    let observed = sorted_abs(&compute(fit, Some(data), kind, opts.seed)?.values);
    let m = observed.len();
    let fitter = Fitter::new(&fit.spec, data)?;
    let refit_opts = FitOptions {
        start: StartStrategy::Given(fit.coefficients.clone()),
        compute_vcov: false,
        ..FitOptions::default()
    };
    let family = fit.family();
    let full_mixture = kind.defined_at_zero();

    let replicates: Vec<Option<Vec<f64>>> = (0..opts.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(opts.seed, b as u64 + 1);
            let y: Vec<f64> = fit
                .fitted
                .iter()
                .zip(&fit.response)
                .map(|(p, &y_obs)| {
                    if full_mixture {
                        sample_unchecked(family, p, &mut rng)
                    } else if y_obs > 0.0 {
                        family.sample(&p.continuous(), &mut rng)
                    } else {
                        0.0
                    }
                })
                .collect();
            let refit = match fitter.fit_response(&y, &refit_opts) {
                Ok(f) if f.converged() => f,
                _ => return None,
            };
            let r = compute(&refit, Some(data), kind, opts.seed ^ (b as u64 + 1)).ok()?;
            let sorted = sorted_abs(&r.values);
            (sorted.len() == m).then_some(sorted)
        })
        .collect();

    let kept: Vec<Vec<f64>> = replicates.into_iter().flatten().collect();
    let dropped = opts.replicates - kept.len();
    if dropped > 0 {
        warn!("{dropped} of {} envelope replicates did not converge and were dropped", opts.replicates);
    }
    if dropped as f64 > MAX_DROPPED_SHARE * opts.replicates as f64 {
        return Err(ZarError::TooManyFailures { failed: dropped, total: opts.replicates });
    }

    let scores = halfnormal_scores(m);
    let mut column = vec![0.0; kept.len()];
    let rows = (0..m)
        .map(|i| {
            column.iter_mut().zip(&kept).for_each(|(c, rep)| *c = rep[i]);
            column.sort_by(f64::total_cmp);
            let (lower, upper) = match opts.band {
                Band::Percentile { lower, upper } => {
                    (percentile_sorted(&column, lower / 100.0), percentile_sorted(&column, upper / 100.0))
                }
                Band::MinMax => (column[0], column[column.len() - 1]),
            };
            EnvelopeRow {
                index: i + 1,
                score: scores[i],
                lower,
                median: percentile_sorted(&column, 0.5),
                upper,
                observed: observed[i],
            }
        })
        .collect();
    Ok(Envelope { kind, rows, replicates_used: kept.len(), replicates_dropped: dropped })
}

fn sorted_abs(values: &[Option<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().flatten().map(|r| r.abs()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation percentile of sorted data (type 7).
pub(crate) fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
