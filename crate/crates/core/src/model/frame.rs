//! Design matrices for the three submodels.
//!
//! Columns are divided by their root mean square before optimization so
//! that coefficients of covariates on very different scales are comparable
//! to the optimizer. Coefficients are mapped back on the way out.

use nalgebra::{DMatrix, DVector};

use super::data::Dataset;
use super::spec::{Submodel, SubmodelSpec, ZarModelSpec};
use crate::error::{Result, ZarError};

#[derive(Debug, Clone)]
pub(crate) struct Design {
    /// Scaled design, `n × p`.
    pub x: DMatrix<f64>,
    /// Root mean square of each original column.
    pub scale: Vec<f64>,
    pub labels: Vec<String>,
}

impl Design {
    pub fn build(sub: &SubmodelSpec, which: Submodel, data: &Dataset) -> Result<Self> {
        let n = data.len();
        let labels = sub.labels();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(labels.len());
        if sub.intercept {
            cols.push(vec![1.0; n]);
        }
        for name in &sub.covariates {
            let col = data.column(name).ok_or_else(|| {
                ZarError::InvalidSpec(format!(
                    "covariate '{name}' of the {} submodel is not in the data",
                    which.name()
                ))
            })?;
            cols.push(col.to_vec());
        }
        let mut scale = Vec::with_capacity(cols.len());
        for (label, col) in labels.iter().zip(cols.iter_mut()) {
            let rms = (col.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64).sqrt();
            if rms == 0.0 {
                return Err(ZarError::RankDeficient {
                    submodel: which.name().to_string(),
                    columns: vec![label.clone()],
                });
            }
            col.iter_mut().for_each(|v| *v /= rms);
            scale.push(rms);
        }
        let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Ok(Self { x, scale, labels })
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn rows(&self, rows: &[usize]) -> DMatrix<f64> {
        self.x.select_rows(rows)
    }

    /// Scaled coefficients to original-scale coefficients.
    pub fn unscale(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter().zip(&self.scale).map(|(b, s)| b / s).collect()
    }

    pub fn rescale(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter().zip(&self.scale).map(|(b, s)| b * s).collect()
    }

    pub fn eta(&self, beta_scaled: &[f64]) -> DVector<f64> {
        &self.x * DVector::from_column_slice(beta_scaled)
    }
}

/// Fails with the names of collinear columns when `x` (restricted to the
/// rows actually used) lacks full column rank.
pub(crate) fn check_rank(x: &DMatrix<f64>, labels: &[String], which: Submodel) -> Result<()> {
    let (n, p) = x.shape();
    if n < p {
        return Err(ZarError::RankDeficient {
            submodel: which.name().to_string(),
            columns: labels.to_vec(),
        });
    }
    // Modified Gram–Schmidt; a column whose residual vanishes is a linear
    // combination of the columns kept before it.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..p {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut r = col.clone();
        for q in &basis {
            let c = q.dot(&r);
            r -= q * c;
        }
        let rn = r.norm();
        if norm == 0.0 || rn <= 1e-9 * norm {
            let mut columns = vec![labels[j].clone()];
            if !kept.is_empty() {
                // Name the earlier columns that take part in the dependence.
                let sub = x.select_columns(&kept);
                if let Some(coef) = (sub.transpose() * &sub).cholesky().map(|c| c.solve(&(sub.transpose() * &col))) {
                    for (k, &idx) in kept.iter().enumerate() {
                        if coef[k].abs() > 1e-8 {
                            columns.push(labels[idx].clone());
                        }
                    }
                }
            }
            return Err(ZarError::RankDeficient {
                submodel: which.name().to_string(),
                columns,
            });
        }
        basis.push(r / rn);
        kept.push(j);
    }
    Ok(())
}

/// All three designs for a spec and covariate table.
#[derive(Debug, Clone)]
pub(crate) struct ModelFrame {
    pub spec: ZarModelSpec,
    pub mu: Design,
    pub phi: Design,
    pub alpha: Design,
}

impl ModelFrame {
    pub fn new(spec: &ZarModelSpec, data: &Dataset) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: spec.clone(),
            mu: Design::build(&spec.mu, Submodel::Mu, data)?,
            phi: Design::build(&spec.phi, Submodel::Phi, data)?,
            alpha: Design::build(&spec.alpha, Submodel::Alpha, data)?,
        })
    }

    pub fn n(&self) -> usize {
        self.mu.x.nrows()
    }
}
