use serde::{Deserialize, Serialize};

use super::fit::ZarFit;
use super::spec::Submodel;
use crate::distributions::normal_sf;
use crate::error::{Result, ZarError};

/// One row of a Wald test table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldRow {
    pub submodel: Submodel,
    pub variable: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Two-sided p-value of a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * normal_sf(z.abs())).min(1.0)
}

/// Wald z tests of each estimated coefficient against zero.
///
/// Coefficients of a block that was not estimated (degenerate data) are
/// left out of the table.
pub fn wald_tests(fit: &ZarFit) -> Result<Vec<WaldRow>> {
    let v = fit.vcov_matrix().ok_or_else(|| {
        ZarError::NonPsdCovariance("no covariance matrix was computed for this fit".into())
    })?;
    let p = v.nrows();
    if p != fit.spec.n_coefficients() || v.ncols() != p {
        return Err(ZarError::Dimension(format!(
            "covariance is {}x{} for {} coefficients",
            v.nrows(),
            v.ncols(),
            fit.spec.n_coefficients()
        )));
    }
    let scale = v.amax().max(f64::MIN_POSITIVE);
    let asym = (&v - v.transpose()).amax();
    let finite = v.iter().all(|x| x.is_finite());
    let min_eig = if finite { v.clone().symmetric_eigen().eigenvalues.min() } else { f64::NAN };
    if !finite || asym > 1e-8 * scale || !(min_eig >= -1e-10 * scale) {
        return Err(ZarError::NonPsdCovariance(
            "covariance is not positive semidefinite; the fit has probably not converged".into(),
        ));
    }

    let estimates = fit.coefficients.flatten();
    Ok(fit
        .labels()
        .into_iter()
        .enumerate()
        .filter(|(_, (which, _))| fit.estimated(*which))
        .map(|(k, (submodel, variable))| {
            let estimate = estimates[k];
            let std_error = v[(k, k)].max(0.0).sqrt();
            let z = estimate / std_error;
            let p_value = if estimate == 0.0 { 1.0 } else { two_sided_p(z) };
            WaldRow { submodel, variable, estimate, std_error, z, p_value }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_values_at_reference_points() {
        assert_eq!(two_sided_p(0.0), 1.0);
        assert!((two_sided_p(1.959963984540054) - 0.05).abs() < 1e-12);
        assert!((two_sided_p(-1.96) - 0.04999579029644087).abs() < 1e-12);
    }
}
