use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioSpec;
use super::stats::{descriptive_stats, Descriptive};
use crate::distributions::{normal_cdf, sample_unchecked};
use crate::error::{Result, ZarError};
use crate::model::{FitOptions, Fitter};
use crate::residuals::{compute, ResidualKind};
use crate::rng::substream;

/// Largest share of replications whose fit may fail.
pub const MAX_NONCONVERGED_SHARE: f64 = 0.02;

/// Tail thresholds; negative values count residuals below, positive values
/// residuals above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub thresholds: Vec<f64>,
}

impl Default for TailSpec {
    fn default() -> Self {
        Self { thresholds: vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0] }
    }
}

impl TailSpec {
    pub fn new(mut thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() || thresholds.iter().any(|t| *t == 0.0 || !t.is_finite()) {
            return Err(ZarError::InvalidSpec("thresholds must be finite and nonzero".into()));
        }
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        Ok(Self { thresholds })
    }

    fn exceeds(t: f64, r: f64) -> bool {
        if t < 0.0 {
            r < t
        } else {
            r > t
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub reps: usize,
    pub kinds: Vec<ResidualKind>,
    pub seed: u64,
    pub tails: TailSpec,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub fit: FitOptions,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            reps: 1000,
            kinds: vec![ResidualKind::ZAQR],
            seed: 0,
            tails: TailSpec::default(),
            workers: None,
            fit: FitOptions { compute_vcov: false, ..FitOptions::default() },
        }
    }
}

/// Exceedance percentages for one residual kind and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    /// Standard normal tail probability in percent.
    pub theoretical: f64,
    /// Percentage of converged replications in which each observation's
    /// residual is beyond the threshold.
    pub percentages: Vec<f64>,
    pub stats: Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub kind: ResidualKind,
    pub rows: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub reps: usize,
    pub converged: usize,
    pub nonconverged: usize,
    pub thresholds: Vec<f64>,
    pub kinds: Vec<KindReport>,
}

/// Counts per `(kind, threshold, observation)`, flattened.
type Counts = Vec<u32>;

/// Seed for the randomized residual of replication `rep`, kept apart from
/// the response streams.
fn residual_seed(seed: u64, rep: usize) -> u64 {
    seed ^ (rep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `opts.reps` replications of `scenario`: simulate responses at the
/// true parameters, refit, compute residuals and tally threshold
/// exceedances.
///
/// Responses of replication `b` come from sub-stream `b` of `opts.seed`.
/// Zero responses count as not exceeding any threshold for residuals that
/// are undefined there. Replications whose fit fails or does not converge
/// are left out of the denominators.
pub fn run_study(scenario: &ScenarioSpec, opts: &StudyOptions) -> Result<SimReport> {
    if opts.reps == 0 {
        return Err(ZarError::InvalidSpec("reps must be at least 1".into()));
    }
    if opts.kinds.is_empty() {
        return Err(ZarError::InvalidSpec("no residual kinds requested".into()));
    }
    scenario.validate()?;
    let data = scenario.dataset()?;
    let truth = scenario.true_params()?;
    let fitter = Fitter::new(&scenario.model, &data)?;
    let family = scenario.model.family;
    let n = scenario.n;
    let t = &opts.tails.thresholds;
    let width = opts.kinds.len() * t.len() * n;

    let one = |b: usize| -> Option<Counts> {
        let mut rng = substream(opts.seed, b as u64);
        let y: Vec<f64> = truth.iter().map(|p| sample_unchecked(family, p, &mut rng)).collect();
        let fit = match fitter.fit_response(&y, &opts.fit) {
            Ok(f) if f.converged() => f,
            _ => return None,
        };
        let mut counts = vec![0u32; width];
        for (k, &kind) in opts.kinds.iter().enumerate() {
            let r = compute(&fit, Some(&data), kind, residual_seed(opts.seed, b)).ok()?;
            for (j, &thr) in t.iter().enumerate() {
                let base = (k * t.len() + j) * n;
                for (i, v) in r.values.iter().enumerate() {
                    if let Some(v) = v {
                        if TailSpec::exceeds(thr, *v) {
                            counts[base + i] += 1;
                        }
                    }
                }
            }
        }
        Some(counts)
    };

    let tally = || {
        (0..opts.reps)
            .into_par_iter()
            .map(|b| match one(b) {
                Some(c) => (c, 0usize),
                None => (vec![0u32; width], 1usize),
            })
            .reduce(
                || (vec![0u32; width], 0usize),
                |(mut a, fa), (b, fb)| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    (a, fa + fb)
                },
            )
    };
    let (counts, failed) = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| ZarError::InvalidSpec(format!("cannot start {w} workers: {e}")))?
            .install(tally),
        None => tally(),
    };

    if failed > 0 {
        warn!("{failed} of {} replications did not converge and were excluded", opts.reps);
    }
    if failed as f64 > MAX_NONCONVERGED_SHARE * opts.reps as f64 {
        return Err(ZarError::TooManyFailures { failed, total: opts.reps });
    }
    let converged = opts.reps - failed;

    let mut kinds = Vec::with_capacity(opts.kinds.len());
    for (k, &kind) in opts.kinds.iter().enumerate() {
        let mut rows = Vec::with_capacity(t.len());
        for (j, &thr) in t.iter().enumerate() {
            let base = (k * t.len() + j) * n;
            let percentages: Vec<f64> = counts[base..base + n]
                .iter()
                .map(|&c| 100.0 * c as f64 / converged as f64)
                .collect();
            rows.push(ThresholdRow {
                threshold: thr,
                theoretical: 100.0 * normal_cdf(-thr.abs()),
                stats: descriptive_stats(&percentages)?,
                percentages,
            });
        }
        kinds.push(KindReport { kind, rows });
    }

    Ok(SimReport {
        scenario: scenario.name.clone(),
        scenario_hash: scenario.hash(),
        seed: opts.seed,
        reps: opts.reps,
        converged,
        nonconverged: failed,
        thresholds: t.clone(),
        kinds,
    })
}

fn interval_label(t: f64) -> String {
    if t < 0.0 {
        format!("< {t}")
    } else {
        format!("> {t}")
    }
}

/// Metadata written next to the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub reps: usize,
    pub converged: usize,
    pub nonconverged: usize,
    pub kinds: Vec<ResidualKind>,
    pub thresholds: Vec<f64>,
}

impl SimReport {
    /// Summary table, one row per kind and threshold:
    /// `residual,interval,theoretical,min,q1,median,mean,q3,max`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("residual,interval,theoretical,min,q1,median,mean,q3,max\n");
        for k in &self.kinds {
            for r in &k.rows {
                let s = &r.stats;
                let _ = writeln!(
                    out,
                    "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
                    k.kind,
                    interval_label(r.threshold),
                    r.theoretical,
                    s.min,
                    s.q1,
                    s.median,
                    s.mean,
                    s.q3,
                    s.max
                );
            }
        }
        out
    }

    /// Per-observation percentages: `residual,interval,observation,percent`.
    pub fn observations_csv(&self) -> String {
        let mut out = String::from("residual,interval,observation,percent\n");
        for k in &self.kinds {
            for r in &k.rows {
                for (i, p) in r.percentages.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{},{:.4}", k.kind, interval_label(r.threshold), i + 1, p);
                }
            }
        }
        out
    }

    pub fn metadata(&self) -> SimMetadata {
        SimMetadata {
            scenario: self.scenario.clone(),
            scenario_hash: self.scenario_hash.clone(),
            seed: self.seed,
            reps: self.reps,
            converged: self.converged,
            nonconverged: self.nonconverged,
            kinds: self.kinds.iter().map(|k| k.kind).collect(),
            thresholds: self.thresholds.clone(),
        }
    }

    pub fn kind(&self, kind: ResidualKind) -> Option<&KindReport> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

impl KindReport {
    pub fn row(&self, threshold: f64) -> Option<&ThresholdRow> {
        self.rows.iter().find(|r| r.threshold == threshold)
    }
}
