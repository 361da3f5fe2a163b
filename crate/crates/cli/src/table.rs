//! CSV input and output.

use std::fs;
use std::io::Write;
use std::path::Path;

use zar_core::{ContinuousFamily, Dataset};

use crate::error::{CliError, CliResult};

/// Reads `response`, the listed covariates and an optional id column from a
/// CSV file with a header row. Other columns are ignored.
pub fn read_dataset(
    path: &Path,
    response: Option<&str>,
    covariates: &[String],
    id: Option<&str>,
    family: Option<ContinuousFamily>,
) -> CliResult<Dataset> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_from(file, &path.display().to_string(), response, covariates, id, family)
}

fn read_from<R: std::io::Read>(
    input: R,
    source: &str,
    response: Option<&str>,
    covariates: &[String],
    id: Option<&str>,
    family: Option<ContinuousFamily>,
) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{source}: cannot read header: {e}")))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{source}: column '{name}' is not in the header")))
    };
    let y_col = response.map(find).transpose()?;
    let x_cols = covariates.iter().map(|c| find(c)).collect::<CliResult<Vec<_>>>()?;
    let id_col = id.map(find).transpose()?;

    let mut y = Vec::new();
    let mut columns = vec![Vec::new(); covariates.len()];
    let mut ids = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Data(format!("{source}: line {line}: {}", e.kind_message()))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let number = |col: usize| -> CliResult<f64> {
            let cell = &record[col];
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!("{source}: line {line}: column '{}': '{cell}' is not a number", &headers[col]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{source}: line {line}: column '{}': value must be finite",
                    &headers[col]
                )));
            }
            Ok(v)
        };
        if let Some(c) = y_col {
            let v = number(c)?;
            check_response(v, family).map_err(|m| CliError::Data(format!("{source}: line {line}: {m}")))?;
            y.push(v);
        }
        for (col, &c) in columns.iter_mut().zip(&x_cols) {
            col.push(number(c)?);
        }
        ids.push(match id_col {
            Some(c) => record[c].to_string(),
            None => (ids.len() + 1).to_string(),
        });
    }
    if ids.is_empty() {
        return Err(CliError::Data(format!("{source}: no data rows")));
    }
    if y_col.is_none() {
        y = vec![0.0; ids.len()];
    }
    Ok(Dataset::with_ids(y, covariates.to_vec(), columns, ids)?)
}

fn check_response(y: f64, family: Option<ContinuousFamily>) -> Result<(), String> {
    if y < 0.0 {
        return Err(format!("negative response {y}"));
    }
    if family == Some(ContinuousFamily::Beta01) && y >= 1.0 {
        return Err(format!("response {y} is not below 1, as the beta family requires"));
    }
    Ok(())
}

trait KindMessage {
    fn kind_message(&self) -> String;
}

impl KindMessage for csv::Error {
    fn kind_message(&self) -> String {
        match self.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("found {len} fields, expected {expected_len}")
            }
            csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".into(),
            _ => self.to_string(),
        }
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))
}

/// Writes rows of cells as CSV.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    write_text(path, &String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Formats an optional value; undefined values become empty cells.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
