use nalgebra::DMatrix;

use crate::model::frame::Design;
use crate::model::{Dataset, Submodel, ZarFit};
use crate::error::{Result, ZarError};

/// Diagonal of the weighted hat matrix of the `μ` submodel over the
/// positive observations, with `φ̂` held fixed.
///
/// The weights are `wᵢ = I_μ(μ̂ᵢ, φ̂ᵢ)·(dμ/dη)²`. Entries for zero responses
/// are `None`. The defined entries sum to `p₁`.
pub fn leverage(fit: &ZarFit, data: &Dataset) -> Result<Vec<Option<f64>>> {
    if data.len() != fit.n() {
        return Err(ZarError::Dimension(format!(
            "{} data rows for a fit on {} observations",
            data.len(),
            fit.n()
        )));
    }
    let spec = &fit.spec;
    let design = Design::build(&spec.mu, Submodel::Mu, data)?;
    let rows: Vec<usize> = (0..fit.n()).filter(|&i| fit.response[i] > 0.0).collect();
    let x = design.rows(&rows);
    let p = x.ncols();
    let link = spec.mu.link;
    let w: Vec<f64> = rows
        .iter()
        .map(|&i| {
            let params = fit.fitted[i].continuous();
            let d = link.derivative(link.link(params.mu));
            spec.family.mu_information(&params) * d * d
        })
        .collect();

    let mut xtwx = DMatrix::<f64>::zeros(p, p);
    for (r, wi) in w.iter().enumerate() {
        let xi = x.row(r);
        xtwx += xi.transpose() * xi * *wi;
    }
    let singular = || ZarError::Singular("weighted cross-product of the mu design is singular".into());
    let diag: Vec<f64> = (0..p).map(|k| xtwx[(k, k)]).collect();
    let chol = xtwx.cholesky().ok_or_else(singular)?;
    let l = chol.l_dirty();
    if rows.len() < p || (0..p).any(|k| !(l[(k, k)].powi(2) > 1e-12 * diag[k])) {
        return Err(singular());
    }
    let inv = chol.inverse();

    let mut out = vec![None; fit.n()];
    for (r, &i) in rows.iter().enumerate() {
        let xi = x.row(r);
        let h = w[r] * (xi * &inv * xi.transpose())[(0, 0)];
        out[i] = Some(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{ContinuousFamily, ZeroAdjustedParams};
    use crate::model::{Coefficients, Convergence, Link, SubmodelSpec, ZarModelSpec};

    fn fake_fit(y: Vec<f64>, mu: Vec<f64>, phi: f64, spec: ZarModelSpec) -> ZarFit {
        let fitted = mu.iter().map(|&m| ZeroAdjustedParams { alpha: 0.2, mu: m, phi }).collect();
        ZarFit {
            spec,
            coefficients: Coefficients { mu: vec![], phi: vec![], alpha: vec![] },
            vcov: None,
            fitted,
            ids: (1..=y.len()).map(|i| i.to_string()).collect(),
            response: y,
            loglik: 0.0,
            start_loglik: 0.0,
            convergence: Convergence { converged: true, iterations: 0, gradient_norm: 0.0 },
            degenerate: None,
        }
    }

    fn gamma_spec() -> ZarModelSpec {
        ZarModelSpec::new(
            ContinuousFamily::Gamma,
            SubmodelSpec::new(["x"], Link::Log),
            SubmodelSpec::intercept_only(Link::Log),
            SubmodelSpec::intercept_only(Link::Logit),
        )
        .unwrap()
    }

    #[test]
    fn three_observation_hand_computation() {
        // Gamma with log link: w = 1/φ for every row, so the hat matrix is
        // the unweighted one of X = [1 0; 1 1; 1 2].
        // (X'X)^{-1} = [5 −3; −3 3]/6, h = (5, 2, 5)/6.
        let data = Dataset::new(vec![1.0, 2.0, 3.0, 0.0], vec!["x".into()], vec![vec![0.0, 1.0, 2.0, 7.0]]).unwrap();
        let fit = fake_fit(data.response().to_vec(), vec![1.0, 2.0, 3.0, 4.0], 0.5, gamma_spec());
        let h = leverage(&fit, &data).unwrap();
        let expected = [5.0 / 6.0, 2.0 / 6.0, 5.0 / 6.0];
        for i in 0..3 {
            assert!((h[i].unwrap() - expected[i]).abs() < 1e-12);
        }
        assert_eq!(h[3], None);
    }

    #[test]
    fn trace_equals_coefficient_count() {
        let n = 40;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| if i % 7 == 0 { 0.0 } else { 1.0 + 0.1 * i as f64 }).collect();
        let mu: Vec<f64> = x.iter().map(|v| (0.3 + v).exp()).collect();
        let spec = ZarModelSpec::new(
            ContinuousFamily::InverseGaussian,
            SubmodelSpec::new(["x"], Link::Log),
            SubmodelSpec::intercept_only(Link::Log),
            SubmodelSpec::intercept_only(Link::Logit),
        )
        .unwrap();
        let data = Dataset::new(y.clone(), vec!["x".into()], vec![x]).unwrap();
        let fit = fake_fit(y, mu, 0.2, spec);
        let h = leverage(&fit, &data).unwrap();
        let sum: f64 = h.iter().flatten().sum();
        assert!((sum - 2.0).abs() < 1e-10);
        assert!(h.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn balanced_design_has_equal_leverage() {
        let x = vec![-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let y = vec![1.0; 6];
        let data = Dataset::new(y.clone(), vec!["x".into()], vec![x]).unwrap();
        let fit = fake_fit(y, vec![1.5; 6], 1.0, gamma_spec());
        for h in leverage(&fit, &data).unwrap() {
            assert!((h.unwrap() - 2.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_design_is_an_error() {
        let data = Dataset::new(vec![1.0, 0.0], vec!["x".into()], vec![vec![1.0, 2.0]]).unwrap();
        let fit = fake_fit(vec![1.0, 0.0], vec![1.0, 1.0], 1.0, gamma_spec());
        assert!(matches!(leverage(&fit, &data), Err(ZarError::Singular(_))));
    }
}
