//! Labeled and unlabeled datasets and their CSV representation.

use std::path::Path;

use crate::error::{Error, Result};

/// Column-major real matrix whose rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if cols == 0 || columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "feature columns must be non-empty and equally long".into(),
            ));
        }
        let data: Vec<f64> = columns.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged feature rows".into()));
        }
        let columns = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::from_columns(columns)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.data[j * self.rows + i]).collect()
    }

    /// Rows selected by `indices`, in that order (repeats allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for j in 0..self.cols {
            let c = self.col(j);
            data.extend(indices.iter().map(|&i| c[i]));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Realizations of `(Y, Z)`; the covariate of interest is `x = Z[:, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub y: Vec<f64>,
    pub z: FeatureMatrix,
}

/// Realizations of `Z` alone; `x = Z[:, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledDataset {
    pub z: FeatureMatrix,
}

impl LabeledDataset {
    pub fn new(y: Vec<f64>, z: FeatureMatrix) -> Result<Self> {
        if y.len() != z.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} feature rows",
                y.len(),
                z.rows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        Ok(Self { y, z })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        self.z.col(0)
    }

    pub fn strip_labels(&self) -> UnlabeledDataset {
        UnlabeledDataset { z: self.z.clone() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header = vec!["y".to_string()];
        header.extend((1..=self.z.cols()).map(|j| format!("z{j}")));
        let rows = (0..self.len()).map(|i| {
            let mut r = vec![self.y[i]];
            r.extend(self.z.row(i));
            r
        });
        write_table(path, &header, rows)
    }

    /// Reads a CSV with a `y` column and `z1..zp` feature columns.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = Table::read(path)?;
        let y = table.column("y")?;
        let z = table.features()?;
        Self::new(y, z).map_err(|e| Error::parse(path, e.to_string()))
    }
}

impl UnlabeledDataset {
    pub fn len(&self) -> usize {
        self.z.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.z.rows() == 0
    }

    pub fn x(&self) -> &[f64] {
        self.z.col(0)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let header: Vec<String> = (1..=self.z.cols()).map(|j| format!("z{j}")).collect();
        write_table(path, &header, (0..self.len()).map(|i| self.z.row(i)))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = Table::read(path)?;
        Ok(Self {
            z: table.features()?,
        })
    }
}

fn write_table(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// A numeric CSV table held in memory, addressed by header name.
#[derive(Debug, Clone)]
pub struct Table {
    path: std::path::PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        Error::parse(path, format!("row {}: not a number: {f:?}", line + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(&self.path, format!("missing column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Columns `z1, z2, ...` in order; at least `z1` must be present.
    pub fn features(&self) -> Result<FeatureMatrix> {
        let mut cols = Vec::new();
        for j in 1.. {
            let name = format!("z{j}");
            if !self.has_column(&name) {
                break;
            }
            cols.push(self.column(&name)?);
        }
        if cols.is_empty() {
            return Err(Error::parse(&self.path, "no z1 column"));
        }
        FeatureMatrix::from_columns(cols).map_err(|e| Error::parse(&self.path, e.to_string()))
    }
}
