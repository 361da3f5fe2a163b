//! Synthetic exam-score data for examples and tests.
//!
//! The generated table imitates an admissions exam: four subject scores on
//! a 0–1000 scale, two binary indicators, and an essay score divided by 1000
//! that is exactly zero for roughly 5% of candidates. Responses are recorded
//! in steps of 0.001. The data are artificial and carry no information about
//! any real exam.

use crate::distributions::{normal_quantile_clamped, sample_unchecked, ContinuousFamily, ZeroAdjustedParams};
use crate::error::Result;
use crate::model::{Coefficients, Dataset, Fitter, Link, SubmodelSpec, ZarModelSpec};
use crate::rng::{open_uniform, substream};

pub const SCORE_COLUMNS: [&str; 4] = ["natural_sciences", "human_sciences", "language", "mathematics"];
pub const MALE: &str = "male";
pub const AGE_OVER_25: &str = "age_over_25";
/// Recording step of the response.
pub const RESOLUTION: f64 = 0.001;

/// Model used to generate the data, which is also the natural model to fit.
pub fn exam_spec() -> ZarModelSpec {
    let mut mu_cov: Vec<&str> = SCORE_COLUMNS.to_vec();
    mu_cov.extend([MALE, AGE_OVER_25]);
    ZarModelSpec {
        family: ContinuousFamily::Beta01,
        mu: SubmodelSpec::new(mu_cov, Link::Logit),
        phi: SubmodelSpec::intercept_only(Link::Log),
        alpha: SubmodelSpec::new(["human_sciences", "language", AGE_OVER_25], Link::Logit),
    }
}

/// True coefficients, in the order of [`exam_spec`].
pub fn exam_truth() -> Coefficients {
    Coefficients {
        mu: vec![-3.3924, 0.0015, 0.0019, 0.0025, 0.0009, -0.1968, -0.1417],
        phi: vec![30f64.ln()],
        alpha: vec![6.0367, -0.0094, -0.0094, 0.7444],
    }
}

/// Generates `n` synthetic candidates from `seed`.
pub fn exam_scores(n: usize, seed: u64) -> Result<Dataset> {
    let mut cov_rng = substream(seed, 0);
    let mut normal = || normal_quantile_clamped(open_uniform(&mut cov_rng));
    let mut scores = vec![Vec::with_capacity(n); SCORE_COLUMNS.len()];
    let mut male = Vec::with_capacity(n);
    let mut age = Vec::with_capacity(n);
    for _ in 0..n {
        // A shared ability factor correlates the four subjects.
        let ability = normal();
        for col in scores.iter_mut() {
            let s = 500.0 + 70.0 * (0.6 * ability + 0.8 * normal());
            col.push(s.clamp(250.0, 850.0).round());
        }
        male.push(if normal() < -0.125 { 1.0 } else { 0.0 });
        age.push(if normal() > 0.84 { 1.0 } else { 0.0 });
    }
    let mut names: Vec<String> = SCORE_COLUMNS.iter().map(|s| s.to_string()).collect();
    names.extend([MALE.to_string(), AGE_OVER_25.to_string()]);
    let mut columns = scores;
    columns.push(male);
    columns.push(age);
    let ids = (1..=n).map(|i| format!("syn-{i:04}")).collect();
    let covariates = Dataset::with_ids(vec![0.0; n], names, columns, ids)?;

    let spec = exam_spec();
    let params: Vec<ZeroAdjustedParams> = Fitter::new(&spec, &covariates)?.params_at(&exam_truth());
    let mut rng = substream(seed, 1);
    let y = params
        .iter()
        .map(|p| {
            let v = sample_unchecked(spec.family, p, &mut rng);
            if v == 0.0 {
                0.0
            } else {
                ((v / RESOLUTION).round() * RESOLUTION).clamp(RESOLUTION, 1.0 - RESOLUTION)
            }
        })
        .collect();
    covariates.with_response(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_zero_share() {
        let d = exam_scores(1000, 3).unwrap();
        assert_eq!(d.len(), 1000);
        let share = d.zero_count() as f64 / 1000.0;
        assert!(share > 0.02 && share < 0.09, "{share}");
        assert!(d.response().iter().all(|&y| y == 0.0 || (RESOLUTION..1.0).contains(&y)));
        assert_eq!(d, exam_scores(1000, 3).unwrap());
    }
}
