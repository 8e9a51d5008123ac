//! Datasets, CSV ingestion and the column standardization the solvers assume.
//!
//! Every solver in this crate works on a [`StandardizedDataset`]: predictors
//! are centered and rescaled so each column has Euclidean norm `sqrt(n)`, and
//! for continuous responses `y` is centered so the intercept drops out of the
//! model. [`StandardizedDataset::destandardize`] maps coefficients back to the
//! original scale.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::cox::RiskSets;

/// The model family a response belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
    Cox,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
            Family::Cox => "cox",
        }
    }

    fn default_response_names(self) -> Vec<String> {
        match self {
            Family::Cox => vec!["time".into(), "status".into()],
            _ => vec!["y".into()],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "linear" => Ok(Family::Gaussian),
            "binomial" | "logistic" => Ok(Family::Binomial),
            "cox" | "coxph" => Ok(Family::Cox),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Continuous(Vec<f64>),
    /// Values are exactly 0.0 or 1.0.
    Binary(Vec<f64>),
    Survival { time: Vec<f64>, status: Vec<bool> },
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Continuous(y) | Response::Binary(y) => y.len(),
            Response::Survival { time, .. } => time.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn family(&self) -> Family {
        match self {
            Response::Continuous(_) => Family::Gaussian,
            Response::Binary(_) => Family::Binomial,
            Response::Survival { .. } => Family::Cox,
        }
    }

    /// Checks the per-family invariants. Rows in error messages are 1-based.
    pub fn validate(&self) -> Result<()> {
        match self {
            Response::Continuous(y) => {
                if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { row: i + 1, column: 0 });
                }
            }
            Response::Binary(y) => {
                if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::BinaryOutOfRange { row: i + 1, value: y[i] });
                }
            }
            Response::Survival { time, status } => {
                if time.len() != status.len() {
                    return Err(Error::Dimension(format!(
                        "{} survival times but {} status values",
                        time.len(),
                        status.len()
                    )));
                }
                if let Some(i) = time.iter().position(|&t| !(t.is_finite() && t > 0.0)) {
                    return Err(Error::NonPositiveTime { row: i + 1, value: time[i] });
                }
                if !status.iter().any(|&s| s) {
                    return Err(Error::NoEvents);
                }
            }
        }
        Ok(())
    }
}

/// A validated design matrix and response.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    response: Response,
    column_names: Option<Vec<String>>,
    response_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, response: Response) -> Result<Self> {
        let family = response.family();
        Self::with_names(x, response, None, family.default_response_names())
    }

    pub fn with_names(
        x: DMatrix<f64>,
        response: Response,
        column_names: Option<Vec<String>>,
        response_names: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
        }
        if p < 1 {
            return Err(Error::Dimension("need at least one predictor".into()));
        }
        if response.len() != n {
            return Err(Error::Dimension(format!(
                "response has {} entries, design matrix has {n} rows",
                response.len()
            )));
        }
        if let Some(names) = &column_names {
            if names.len() != p {
                return Err(Error::Dimension(format!("{} column names for {p} columns", names.len())));
            }
        }
        let expected = if matches!(response, Response::Survival { .. }) { 2 } else { 1 };
        if response_names.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} response column name(s), got {}",
                response_names.len()
            )));
        }
        for j in 0..p {
            for i in 0..n {
                if !x[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i + 1, column: j + 1 });
                }
            }
        }
        response.validate()?;
        Ok(Dataset { x, response, column_names, response_names })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn family(&self) -> Family {
        self.response.family()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn response_names(&self) -> &[String] {
        &self.response_names
    }

    /// Predictor name for column `j`; `X1..Xp` when the source had no header.
    pub fn column_name(&self, j: usize) -> String {
        match &self.column_names {
            Some(names) => names[j].clone(),
            None => format!("X{}", j + 1),
        }
    }

    /// Writes the dataset in the format [`load_csv`] reads. A header row is
    /// written iff the dataset carries column names.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let mut out = BufWriter::new(file);
        self.write_csv_to(&mut out)
            .and_then(|_| out.flush())
            .map_err(|source| Error::Io { path: path.into(), source })
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        if let Some(names) = &self.column_names {
            let header: Vec<&str> = names
                .iter()
                .chain(self.response_names.iter())
                .map(String::as_str)
                .collect();
            writeln!(out, "{}", header.join(","))?;
        }
        let mut line = String::new();
        for i in 0..self.n() {
            line.clear();
            for j in 0..self.p() {
                if j > 0 {
                    line.push(',');
                }
                push_number(&mut line, self.x[(i, j)]);
            }
            match &self.response {
                Response::Continuous(y) | Response::Binary(y) => {
                    line.push(',');
                    push_number(&mut line, y[i]);
                }
                Response::Survival { time, status } => {
                    line.push(',');
                    push_number(&mut line, time[i]);
                    line.push_str(if status[i] { ",1" } else { ",0" });
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

// `Display` for f64 prints the shortest string that parses back to the same bits.
fn push_number(line: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(line, "{v}");
}

/// How to interpret a CSV file.
#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub family: Family,
    pub has_header: bool,
    /// Response column names (one, or `time,status` for Cox). Empty means
    /// `y` / `time,status` with a header, or the trailing column(s) without.
    pub response: Vec<String>,
}

impl CsvOptions {
    pub fn new(family: Family) -> Self {
        CsvOptions { family, has_header: true, response: Vec::new() }
    }
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    read_csv(file, opts)
}

pub fn read_csv<R: std::io::Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let n_response = if opts.family == Family::Cox { 2 } else { 1 };
    let mut header: Option<Vec<String>> = None;
    if opts.has_header {
        match records.next() {
            Some(rec) => header = Some(rec?.iter().map(str::to_owned).collect()),
            None => return Err(Error::Dimension("empty file".into())),
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in records.enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(rec.len());
        for (c, cell) in rec.iter().enumerate() {
            let col_label = || match &header {
                Some(h) => h[c].clone(),
                None => (c + 1).to_string(),
            };
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
                return Err(Error::MissingValue { row: r + 1, column: col_label() });
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: r + 1,
                column: col_label(),
                value: cell.to_owned(),
            })?;
            row.push(v);
        }
        rows.push(row);
    }

    let width = header.as_ref().map(Vec::len).or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    if width <= n_response {
        return Err(Error::Dimension(format!(
            "need at least one predictor column besides {n_response} response column(s)"
        )));
    }

    // Resolve response column positions.
    let response_idx: Vec<usize> = match &header {
        Some(h) => {
            let wanted = if opts.response.is_empty() {
                opts.family.default_response_names()
            } else {
                opts.response.clone()
            };
            if wanted.len() != n_response {
                return Err(Error::InvalidArgument(format!(
                    "family {} needs {n_response} response column(s), got {}",
                    opts.family,
                    wanted.len()
                )));
            }
            wanted
                .iter()
                .map(|name| {
                    h.iter().position(|c| c == name).ok_or_else(|| Error::MissingColumn(name.clone()))
                })
                .collect::<Result<_>>()?
        }
        None => (width - n_response..width).collect(),
    };
    let predictor_idx: Vec<usize> = (0..width).filter(|c| !response_idx.contains(c)).collect();

    let n = rows.len();
    let p = predictor_idx.len();
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][predictor_idx[j]]);
    let column = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<f64>>();
    let response = match opts.family {
        Family::Gaussian => Response::Continuous(column(response_idx[0])),
        Family::Binomial => Response::Binary(column(response_idx[0])),
        Family::Cox => {
            let time = column(response_idx[0]);
            let raw = column(response_idx[1]);
            let mut status = Vec::with_capacity(n);
            for (i, &s) in raw.iter().enumerate() {
                match s {
                    1.0 => status.push(true),
                    0.0 => status.push(false),
                    v => return Err(Error::InvalidStatus { row: i + 1, value: v }),
                }
            }
            Response::Survival { time, status }
        }
    };

    let (column_names, response_names) = match &header {
        Some(h) => (
            Some(predictor_idx.iter().map(|&c| h[c].clone()).collect()),
            response_idx.iter().map(|&c| h[c].clone()).collect(),
        ),
        None => (None, opts.family.default_response_names()),
    };
    Dataset::with_names(x, response, column_names, response_names)
}

/// A dataset after centering/scaling, plus the metadata needed to undo it.
#[derive(Clone, Debug)]
pub struct StandardizedDataset {
    dataset: Dataset,
    column_centers: Vec<f64>,
    column_scales: Vec<f64>,
    response_center: f64,
    risk_sets: Option<RiskSets>,
}

/// Centers every column and rescales it to norm `sqrt(n)`; centers `y` for
/// continuous responses. Constant columns are rejected.
pub fn standardize(d: &Dataset) -> Result<StandardizedDataset> {
    let (n, p) = d.x.shape();
    let sqrt_n = (n as f64).sqrt();
    let mut x = d.x.clone();
    let mut centers = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let mut col = x.column_mut(j);
        let max_abs = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mean = col.iter().sum::<f64>() / n as f64;
        col.add_scalar_mut(-mean);
        let norm = col.norm();
        if norm <= 1e-12 * sqrt_n * max_abs.max(1.0) {
            return Err(Error::ConstantColumn(d.column_name(j)));
        }
        let scale = norm / sqrt_n;
        col /= scale;
        centers.push(mean);
        scales.push(scale);
    }

    let (response, response_center) = match &d.response {
        Response::Continuous(y) => {
            let mean = y.iter().sum::<f64>() / n as f64;
            (Response::Continuous(y.iter().map(|v| v - mean).collect()), mean)
        }
        other => (other.clone(), 0.0),
    };
    let risk_sets = match &response {
        Response::Survival { time, .. } => Some(RiskSets::new(time)),
        _ => None,
    };
    let dataset = Dataset {
        x,
        response,
        column_names: d.column_names.clone(),
        response_names: d.response_names.clone(),
    };
    Ok(StandardizedDataset {
        dataset,
        column_centers: centers,
        column_scales: scales,
        response_center,
        risk_sets,
    })
}

impl StandardizedDataset {
    /// Wraps data that the caller asserts is already on the model scale.
    /// Centers are 0 and scales 1, so destandardizing is the identity.
    pub fn identity(d: Dataset) -> Self {
        let p = d.p();
        let risk_sets = match &d.response {
            Response::Survival { time, .. } => Some(RiskSets::new(time)),
            _ => None,
        };
        StandardizedDataset {
            dataset: d,
            column_centers: vec![0.0; p],
            column_scales: vec![1.0; p],
            response_center: 0.0,
            risk_sets,
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.dataset.x
    }

    /// Column `j` of the standardized design as a contiguous slice.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.dataset.x.as_slice()[j * n..(j + 1) * n]
    }

    pub fn response(&self) -> &Response {
        &self.dataset.response
    }

    pub fn family(&self) -> Family {
        self.dataset.family()
    }

    pub fn n(&self) -> usize {
        self.dataset.n()
    }

    pub fn p(&self) -> usize {
        self.dataset.p()
    }

    pub fn column_centers(&self) -> &[f64] {
        &self.column_centers
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn response_center(&self) -> f64 {
        self.response_center
    }

    pub(crate) fn risk_sets(&self) -> Option<&RiskSets> {
        self.risk_sets.as_ref()
    }

    /// Maps standardized coefficients (and the standardized-scale intercept,
    /// zero except for logistic models) to `(intercept, beta)` on the
    /// original scale, so that `intercept + x_orig . beta` reproduces the
    /// standardized linear predictor plus the response center.
    pub fn destandardize(&self, beta_std: &[f64], intercept_std: f64) -> (f64, Vec<f64>) {
        let beta: Vec<f64> = beta_std
            .iter()
            .zip(&self.column_scales)
            .map(|(b, s)| b / s)
            .collect();
        let shift: f64 = beta.iter().zip(&self.column_centers).map(|(b, c)| b * c).sum();
        (self.response_center + intercept_std - shift, beta)
    }
}

/// Free-function form of [`StandardizedDataset::destandardize`] for models
/// without a standardized-scale intercept.
pub fn destandardize_coefficients(beta_std: &[f64], meta: &StandardizedDataset) -> (f64, Vec<f64>) {
    meta.destandardize(beta_std, 0.0)
}
