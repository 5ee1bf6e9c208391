//! Training data: a predictor matrix, a response vector, and the task kind.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Regression,
    Binary,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Binary => "binary",
        }
    }
}

/// An n-by-d predictor matrix with a length-n response.
///
/// Immutable after construction; operations that transform data return new
/// values.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    kind: TaskKind,
    standardized: bool,
}

/// Column statistics captured by [`standardize`], reusable on held-out data.
#[derive(Debug, Clone)]
pub struct StandardizeStats {
    pub x_mean: Vec<f64>,
    pub x_scale: Vec<f64>,
    /// Present only when the response was centered and scaled.
    pub y_mean: Option<f64>,
    pub y_scale: Option<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, kind: TaskKind) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                what: "rows of X vs length of y",
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "dataset entries" });
        }
        if kind == TaskKind::Binary && y.iter().any(|v| *v != 1.0 && *v != -1.0) {
            return Err(Error::Config {
                what: "binary dataset requires every response in {-1, +1}".into(),
            });
        }
        Ok(Dataset {
            x,
            y,
            kind,
            standardized: false,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn require_kind(&self, kind: TaskKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.as_str(),
            });
        }
        Ok(())
    }

    /// Mean squared residual `(1/n) sum_i (y_i - beta^T x_i)^2`.
    pub fn mse(&self, beta: &DVector<f64>) -> f64 {
        let r = &self.y - &self.x * beta;
        r.norm_squared() / self.n() as f64
    }
}

/// Centers and scales every predictor column (standard deviation with
/// divisor n-1); the response is transformed only for regression data and
/// only when `scale_response` is set.
pub fn standardize(ds: &Dataset, scale_response: bool) -> Result<(Dataset, StandardizeStats)> {
    let n = ds.n();
    if n < 2 {
        return Err(Error::EmptyInput {
            what: "standardize needs at least two rows",
        });
    }
    let mut x_mean = Vec::with_capacity(ds.d());
    let mut x_scale = Vec::with_capacity(ds.d());
    for j in 0..ds.d() {
        let col = ds.x.column(j);
        let m = col.mean();
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0);
        let s = var.sqrt();
        if s == 0.0 {
            return Err(Error::DegenerateColumn { index: j });
        }
        x_mean.push(m);
        x_scale.push(s);
    }
    let (y_mean, y_scale) = if scale_response && ds.kind == TaskKind::Regression {
        let m = ds.y.mean();
        let var = ds.y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0);
        let s = var.sqrt();
        if s == 0.0 {
            return Err(Error::Config {
                what: "response is constant; cannot scale".into(),
            });
        }
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    let stats = StandardizeStats {
        x_mean,
        x_scale,
        y_mean,
        y_scale,
    };
    let mut out = apply_standardization(ds, &stats)?;
    // Only data standardized by its own statistics carries the flag; data
    // transformed with another sample's statistics does not have unit
    // column moments.
    out.standardized = true;
    Ok((out, stats))
}

/// Applies previously computed standardization statistics (training-set
/// statistics applied to held-out data).
pub fn apply_standardization(ds: &Dataset, stats: &StandardizeStats) -> Result<Dataset> {
    if stats.x_mean.len() != ds.d() {
        return Err(Error::DimensionMismatch {
            what: "standardization stats vs predictor columns",
            expected: ds.d(),
            got: stats.x_mean.len(),
        });
    }
    let mut x = ds.x.clone();
    for j in 0..ds.d() {
        let m = stats.x_mean[j];
        let s = stats.x_scale[j];
        for v in x.column_mut(j).iter_mut() {
            *v = (*v - m) / s;
        }
    }
    let y = match (stats.y_mean, stats.y_scale) {
        (Some(m), Some(s)) => ds.y.map(|v| (v - m) / s),
        _ => ds.y.clone(),
    };
    Dataset::new(x, y, ds.kind)
}

/// Reads a dataset from a CSV file (RFC 4180 subset, header row required).
/// The named column is the response; all remaining columns are predictors,
/// in file order.
pub fn read_csv(path: &str, response: &str, kind: TaskKind) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_string(),
            what: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_string(),
            what: e.to_string(),
        })?
        .clone();
    let y_col = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::Csv {
            path: path.to_string(),
            what: format!("response column '{response}' not found in header"),
        })?;
    let d = headers.len() - 1;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_string(),
            what: format!("line {}: {e}", line + 2),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Csv {
                path: path.to_string(),
                what: format!(
                    "line {}: expected {} fields, got {}",
                    line + 2,
                    headers.len(),
                    record.len()
                ),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Csv {
                path: path.to_string(),
                what: format!("line {}: cannot parse '{}' as a number", line + 2, field),
            })?;
            if j == y_col {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(Error::EmptyInput { what: "csv has no data rows" });
    }
    let n = ys.len();
    let x = DMatrix::from_row_slice(n, d, &xs);
    Dataset::new(x, DVector::from_vec(ys), kind)
}

/// Writes a dataset as CSV with columns `x1..xd,y`.
pub fn write_csv(ds: &Dataset, path: &str) -> Result<()> {
    let mut out = String::new();
    for j in 0..ds.d() {
        out.push_str(&format!("x{},", j + 1));
    }
    out.push_str("y\n");
    for i in 0..ds.n() {
        for j in 0..ds.d() {
            out.push_str(&format!("{},", ds.x[(i, j)]));
        }
        out.push_str(&format!("{}\n", ds.y[i]));
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })
}
