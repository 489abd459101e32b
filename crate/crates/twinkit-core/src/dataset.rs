//! Tabular numeric data: CSV loading, per-column standardization, and
//! subset export with original row identity preserved.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Result, TwinError};

/// What to do with a zero-variance column during standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantColumnPolicy {
    /// Fail with an error naming the column.
    Reject,
    /// Map the whole column to 0. A constant column carries no distance
    /// information either way.
    Zero,
}

/// A numeric table as read from disk: un-standardized values plus the header.
///
/// Rows are identified by their zero-based position, which every downstream
/// result refers back to.
#[derive(Debug, Clone)]
pub struct RawTable {
    column_names: Vec<String>,
    values: Vec<f64>, // row-major, n_rows * n_cols
    n_rows: usize,
    n_cols: usize,
}

impl RawTable {
    /// Builds a table from row vectors, validating shape and finiteness.
    pub fn from_rows(column_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if column_names.is_empty() {
            return Err(TwinError::EmptySelection);
        }
        for (i, a) in column_names.iter().enumerate() {
            if column_names[..i].contains(a) {
                return Err(TwinError::DuplicateColumn { name: a.clone() });
            }
        }
        if rows.len() < 2 {
            return Err(TwinError::TooFewRows { found: rows.len() });
        }
        let n_cols = column_names.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(TwinError::RaggedRow {
                    row: r,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(TwinError::NonFiniteValue { row: r, col: c });
                }
                values.push(v);
            }
        }
        Ok(Self {
            column_names,
            values,
            n_rows: rows.len(),
            n_cols,
        })
    }

    /// Loads a CSV file with a header row. `column_selection` restricts and
    /// orders the columns; `None` keeps all columns in file order.
    ///
    /// Accepts LF or CRLF line endings and numbers with optional scientific
    /// notation. Every selected cell must parse as a finite number.
    pub fn load_csv(path: &Path, column_selection: Option<&[String]>) -> Result<Self> {
        let file = File::open(path).map_err(|source| TwinError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(file);
        let csv_err = |source| TwinError::Csv {
            path: path.to_path_buf(),
            source,
        };

        let header: Vec<String> = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(|s| s.to_string())
            .collect();
        for (i, name) in header.iter().enumerate() {
            if header[..i].contains(name) {
                return Err(TwinError::DuplicateColumn { name: name.clone() });
            }
        }

        // Map the selection onto header positions.
        let selected: Vec<usize> = match column_selection {
            None => (0..header.len()).collect(),
            Some(names) => {
                if names.is_empty() {
                    return Err(TwinError::EmptySelection);
                }
                for (i, a) in names.iter().enumerate() {
                    if names[..i].contains(a) {
                        return Err(TwinError::DuplicateColumn { name: a.clone() });
                    }
                }
                names
                    .iter()
                    .map(|name| {
                        header
                            .iter()
                            .position(|h| h == name)
                            .ok_or_else(|| TwinError::UnknownColumn { name: name.clone() })
                    })
                    .collect::<Result<_>>()?
            }
        };
        let column_names: Vec<String> = selected.iter().map(|&i| header[i].clone()).collect();

        let mut values = Vec::new();
        let mut n_rows = 0usize;
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            for &c in &selected {
                let cell = record.get(c).unwrap_or("").trim();
                let parsed: std::result::Result<f64, _> = cell.parse();
                match parsed {
                    Ok(v) if v.is_finite() => values.push(v),
                    _ => {
                        return Err(TwinError::NonNumericCell {
                            row: r,
                            column: header[c].clone(),
                            value: cell.to_string(),
                        })
                    }
                }
            }
            n_rows += 1;
        }
        if n_rows < 2 {
            return Err(TwinError::TooFewRows { found: n_rows });
        }
        Ok(Self {
            column_names,
            values,
            n_rows,
            n_cols: selected.len(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Writes the given rows (ascending by index, original values) to a CSV
    /// file with the original header. Emits LF line endings and
    /// shortest-round-trip decimal formatting, so a reload reproduces the
    /// values bit for bit.
    pub fn write_split_csv(&self, indices: &[usize], path: &Path) -> Result<()> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(TwinError::DuplicateIndex { index: pair[0] });
            }
        }
        if let Some(&last) = sorted.last() {
            if last >= self.n_rows {
                return Err(TwinError::RowOutOfRange {
                    index: last,
                    len: self.n_rows,
                });
            }
        }

        let file = File::create(path).map_err(|source| TwinError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        let csv_err = |source| TwinError::Csv {
            path: path.to_path_buf(),
            source,
        };
        writer.write_record(&self.column_names).map_err(csv_err)?;
        let mut field = String::new();
        for &i in &sorted {
            let mut record = csv::StringRecord::new();
            for &v in self.row(i) {
                field.clear();
                // `Display` for f64 is the shortest string that round-trips.
                use std::fmt::Write as _;
                let _ = write!(field, "{v}");
                record.push_field(&field);
            }
            writer.write_record(&record).map_err(csv_err)?;
        }
        writer
            .into_inner()
            .map_err(|e| TwinError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            })?
            .flush()
            .map_err(|source| TwinError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(())
    }

    /// Per-column standardization: subtract the column mean, divide by the
    /// sample standard deviation (divisor N-1).
    pub fn standardize(&self, policy: ConstantColumnPolicy) -> Result<Dataset> {
        if self.n_rows < 2 {
            return Err(TwinError::TooFewRows { found: self.n_rows });
        }
        let n = self.n_rows as f64;
        let mut means = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                means[j] += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut sds = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                let d = v - means[j];
                sds[j] += d * d;
            }
        }
        for (j, s) in sds.iter_mut().enumerate() {
            *s = (*s / (n - 1.0)).sqrt();
            if *s == 0.0 && policy == ConstantColumnPolicy::Reject {
                return Err(TwinError::ConstantColumn {
                    name: self.column_names[j].clone(),
                });
            }
        }
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n_rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if sds[j] == 0.0 {
                    values.push(0.0);
                } else {
                    values.push((v - means[j]) / sds[j]);
                }
            }
        }
        Ok(Dataset {
            values,
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            means,
            sds,
        })
    }
}

/// A standardized numeric matrix. All distances and energies downstream are
/// computed on these coordinates; row `i` here is row `i` of the source table.
#[derive(Debug, Clone)]
pub struct Dataset {
    values: Vec<f64>, // row-major, n_rows * n_cols
    n_rows: usize,
    n_cols: usize,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Dataset {
    /// Wraps rows verbatim, treating them as already-standardized
    /// coordinates. Used by tests and by the `--no-standardize` escape hatch.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(TwinError::EmptyDataset);
        }
        let n_cols = rows[0].len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(TwinError::RaggedRow {
                    row: r,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(TwinError::NonFiniteValue { row: r, col: c });
                }
                values.push(v);
            }
        }
        Ok(Self {
            values,
            n_rows: rows.len(),
            n_cols,
            means: vec![0.0; n_cols],
            sds: vec![1.0; n_cols],
        })
    }

    /// Takes a table's values as-is, without standardizing.
    pub fn without_standardization(table: &RawTable) -> Self {
        Self {
            values: table.values.clone(),
            n_rows: table.n_rows,
            n_cols: table.n_cols,
            means: vec![0.0; table.n_cols],
            sds: vec![1.0; table.n_cols],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Column means of the source table (zero when nothing was standardized).
    pub fn source_means(&self) -> &[f64] {
        &self.means
    }

    /// Sample standard deviations of the source table.
    pub fn source_sds(&self) -> &[f64] {
        &self.sds
    }
}
