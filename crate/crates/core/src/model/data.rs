use serde::{Deserialize, Serialize};

use crate::error::{Result, ZarError};

/// Responses plus named numeric covariate columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    response: Vec<f64>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    ids: Vec<String>,
}

impl Dataset {
    /// Builds a dataset; observation ids default to `1..=n`.
    pub fn new(response: Vec<f64>, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (1..=response.len()).map(|i| i.to_string()).collect();
        Self::with_ids(response, names, columns, ids)
    }

    pub fn with_ids(
        response: Vec<f64>,
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        ids: Vec<String>,
    ) -> Result<Self> {
        let n = response.len();
        if names.len() != columns.len() {
            return Err(ZarError::Dimension(format!(
                "{} column names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(ZarError::Dimension(format!(
                    "column '{name}' has {} values, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(ZarError::InvalidData(format!(
                    "column '{name}' has a non-finite value at row {}",
                    i + 1
                )));
            }
        }
        if ids.len() != n {
            return Err(ZarError::Dimension(format!("{} ids for {n} observations", ids.len())));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(ZarError::InvalidData(format!("duplicate column name '{dup}'")));
        }
        Ok(Self { response, names, columns, ids })
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Same covariates with a different response vector.
    pub fn with_response(&self, response: Vec<f64>) -> Result<Self> {
        if response.len() != self.len() {
            return Err(ZarError::Dimension(format!(
                "{} responses for {} observations",
                response.len(),
                self.len()
            )));
        }
        Ok(Self { response, ..self.clone() })
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            response: rows.iter().map(|&i| self.response[i]).collect(),
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    /// Multiplies one covariate column by `factor`.
    pub fn scale_column(&mut self, name: &str, factor: f64) -> Result<()> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ZarError::InvalidData(format!("no column named '{name}'")))?;
        self.columns[i].iter_mut().for_each(|v| *v *= factor);
        Ok(())
    }

    pub fn set_response(&mut self, i: usize, y: f64) {
        self.response[i] = y;
    }

    pub fn zero_count(&self) -> usize {
        self.response.iter().filter(|&&y| y == 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_duplicate_columns() {
        let r = Dataset::new(vec![0.0, 1.0], vec!["a".into()], vec![vec![1.0]]);
        assert!(r.is_err());
        let r = Dataset::new(
            vec![0.0, 1.0],
            vec!["a".into(), "a".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        );
        assert!(r.is_err());
        let r = Dataset::new(vec![0.0], vec!["a".into()], vec![vec![f64::NAN]]);
        assert!(r.is_err());
    }

    #[test]
    fn select_and_lookup() {
        let d = Dataset::new(
            vec![0.0, 0.5, 0.7],
            vec!["x".into()],
            vec![vec![1.0, 2.0, 3.0]],
        )
        .unwrap();
        let s = d.select_rows(&[2, 0]);
        assert_eq!(s.response(), &[0.7, 0.0]);
        assert_eq!(s.column("x").unwrap(), &[3.0, 1.0]);
        assert_eq!(s.ids(), &["3".to_string(), "1".to_string()]);
        assert_eq!(d.zero_count(), 1);
    }
}
