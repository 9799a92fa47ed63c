//! CSV and JSON files: sample matrices, truth sidecars and report tables.

use std::fs::File;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sngca_core::{ModelSpec, SubspaceEstimate};

use crate::error::{CliError, CliResult};

/// Number of columns in the header of a CSV file.
pub fn csv_width(path: &Path) -> CliResult<usize> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    Ok(rdr.headers().map_err(|e| CliError::csv(path, e))?.len())
}

pub fn read_matrix(path: &Path) -> CliResult<Array2<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let d = rdr.headers().map_err(|e| CliError::csv(path, e))?.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{}: row {}: {field:?} is not a number",
                    path.display(),
                    line + 1
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, d), values)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Writes samples under the header `x1,…,xd`.
pub fn write_matrix(path: &Path, data: ArrayView2<f64>) -> CliResult<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header: Vec<String> = (1..=data.ncols()).map(|i| format!("x{i}")).collect();
    wtr.write_record(&header).map_err(|e| CliError::csv(path, e))?;
    for row in data.rows() {
        wtr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| CliError::csv(path, e))?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        wtr.serialize(r).map_err(|e| CliError::csv(path, e))?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    rdr.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::csv(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    serde_json::to_writer_pretty(file, value).map_err(|e| CliError::json(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| CliError::json(path, e))
}

/// Written next to generated data: the model, its seed and an orthonormal
/// basis of the target subspace in raw coordinates (one row per ambient
/// coordinate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub model: ModelSpec,
    pub seed: u64,
    pub truth_basis: Vec<Vec<f64>>,
}

impl TruthSidecar {
    pub fn subspace(&self) -> CliResult<SubspaceEstimate> {
        let d = self.truth_basis.len();
        let m = self.truth_basis.first().map_or(0, Vec::len);
        if d == 0 || self.truth_basis.iter().any(|r| r.len() != m) {
            return Err(CliError::Config("truth basis is empty or ragged".into()));
        }
        let flat: Vec<f64> = self.truth_basis.iter().flatten().copied().collect();
        let basis = Array2::from_shape_vec((d, m), flat)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(SubspaceEstimate::from_span(basis.view()))
    }
}
