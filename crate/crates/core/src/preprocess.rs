//! Cleaning, encoding, imputation and min-max scaling.
//!
//! The five identifier-like columns are dropped; open access becomes 0/1,
//! coverage becomes a count of years, publisher and country are label
//! encoded in lexicographic order, and every column is rescaled to [0, 1].

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{parse_numeric, Column, ColumnType, RawTable};
use crate::matrix::Matrix;

pub const DEFAULT_REFERENCE_YEAR: i32 = 2021;

/// Columns removed before modelling.
pub const IDENTIFIER_COLUMNS: [Column; 5] = [
    Column::FullTitle,
    Column::Website,
    Column::JournalHomepage,
    Column::Issn,
    Column::TotalArticles,
];

const OPEN_ACCESS_YES: [&str; 7] = ["yes", "y", "true", "1", "open", "open access", "oa"];
const OPEN_ACCESS_NO: [&str; 7] = ["no", "n", "false", "0", "closed", "subscription", "non-oa"];

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("row {row}: unrecognized open access value \"{value}\"")]
    UnrecognizedOpenAccessValue { row: usize, value: String },
    #[error("row {row}: no 4-digit year in coverage \"{value}\"")]
    UnparseableCoverage { row: usize, value: String },
    #[error("row {row}: coverage starts in {start}, after reference year {reference}")]
    FutureStartYear { row: usize, start: i32, reference: i32 },
    #[error("row {row}: unseen {column} category \"{value}\"")]
    UnseenCategory {
        row: usize,
        column: String,
        value: String,
    },
    #[error("missing cell at row {row}, column {column}")]
    MissingCell { row: usize, column: String },
    #[error("column {0} has no observed values")]
    AllMissingColumn(String),
    #[error("column {0} not present in the table")]
    UnknownColumn(String),
    #[error("sidecar: {0}")]
    Sidecar(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// How a feature participates in Gower distance and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    EncodedCategorical,
}

/// Named numeric matrix. Produced by [`min_max_scale`] with every cell in
/// [0, 1]; also used for unscaled dense data ahead of per-fold scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub values: Matrix,
    pub feature_names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
}

impl FeatureMatrix {
    pub fn new(values: Matrix, feature_names: Vec<String>, kinds: Vec<FeatureKind>) -> Self {
        assert_eq!(values.n_cols(), feature_names.len());
        assert_eq!(values.n_cols(), kinds.len());
        FeatureMatrix {
            values,
            feature_names,
            kinds,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.values.n_cols()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select_rows(idx),
            feature_names: self.feature_names.clone(),
            kinds: self.kinds.clone(),
        }
    }

    /// Keep the named features, in the order given.
    pub fn select_features<S: AsRef<str>>(
        &self,
        names: &[S],
    ) -> Result<FeatureMatrix, PreprocessError> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_index(n.as_ref())
                    .ok_or_else(|| PreprocessError::UnknownColumn(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureMatrix {
            values: self.values.select_cols(&idx),
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            kinds: idx.iter().map(|&j| self.kinds[j]).collect(),
        })
    }

    /// Append a column; used to construct fixtures such as leakage probes.
    pub fn with_feature(&self, name: &str, kind: FeatureKind, column: &[f64]) -> FeatureMatrix {
        assert_eq!(column.len(), self.n_rows());
        let p = self.n_features();
        let mut m = Matrix::zeros(self.n_rows(), p + 1);
        for r in 0..self.n_rows() {
            for c in 0..p {
                m.set(r, c, self.values.get(r, c));
            }
            m.set(r, p, column[r]);
        }
        let mut names = self.feature_names.clone();
        names.push(name.to_string());
        let mut kinds = self.kinds.clone();
        kinds.push(kind);
        FeatureMatrix::new(m, names, kinds)
    }
}

/// Remove the identifier columns. Absent columns produce a warning.
fn parse_header_and_rows<R: Read>(
    input: R,
) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>), PreprocessError> {
    let mut rd = csv::Reader::from_reader(input);
    let names: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (r, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .zip(&names)
            .map(|(cell, name)| {
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>().map(Some).map_err(|_| {
                    PreprocessError::Sidecar(format!("row {r}, column {name}: not a number: {cell:?}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

impl FeatureMatrix {
    /// One header row of feature names, then one row per sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PreprocessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.feature_names)?;
        for row in self.values.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`FeatureMatrix::write_csv`]. Kinds are not stored in the
    /// file; `None` marks every feature numeric.
    pub fn read_csv<R: Read>(
        input: R,
        kinds: Option<Vec<FeatureKind>>,
    ) -> Result<FeatureMatrix, PreprocessError> {
        let (names, rows) = parse_header_and_rows(input)?;
        let p = names.len();
        let mut m = Matrix::zeros(rows.len(), p);
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let v = v.ok_or_else(|| PreprocessError::MissingCell {
                    row: r,
                    column: names[c].clone(),
                })?;
                m.set(r, c, v);
            }
        }
        let kinds = kinds.unwrap_or_else(|| vec![FeatureKind::Numeric; p]);
        if kinds.len() != p {
            return Err(PreprocessError::Sidecar(format!(
                "{} kinds for {p} columns",
                kinds.len()
            )));
        }
        Ok(FeatureMatrix::new(m, names, kinds))
    }
}

pub fn drop_identifier_columns(table: &RawTable) -> (RawTable, Vec<String>) {
    let warnings = IDENTIFIER_COLUMNS
        .iter()
        .filter(|&&c| table.column_index(c).is_none())
        .map(|c| format!("column \"{}\" already absent", c.display_name()))
        .collect();
    (table.without_columns(&IDENTIFIER_COLUMNS), warnings)
}

/// Per-column numeric encoding, fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
pub enum ColumnEncoding {
    /// Dense codes `0..k` assigned in lexicographic order of the text.
    Label { column: Column, categories: Vec<String> },
    Binary {
        column: Column,
        yes: Vec<String>,
        no: Vec<String>,
    },
    /// Years of coverage counted up to and including `reference_year`.
    Years { column: Column, reference_year: i32 },
    Number { column: Column },
}

impl ColumnEncoding {
    pub fn column(&self) -> Column {
        match self {
            ColumnEncoding::Label { column, .. }
            | ColumnEncoding::Binary { column, .. }
            | ColumnEncoding::Years { column, .. }
            | ColumnEncoding::Number { column } => *column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingMap {
    pub columns: Vec<ColumnEncoding>,
}

/// What to do with a category not seen when the map was fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnseenCategory {
    #[default]
    Reject,
    /// Map to the reserved code `k`, one past the last fitted code.
    ReservedCode,
}

impl EncodingMap {
    /// Fit encodings for a table that has been through [`drop_identifier_columns`].
    pub fn fit(table: &RawTable, reference_year: i32) -> EncodingMap {
        let columns = table
            .columns()
            .iter()
            .map(|&c| match c {
                Column::Publisher | Column::Country => {
                    let mut cats: Vec<String> = (0..table.n_rows())
                        .filter(|&r| !table.is_missing(r, c))
                        .map(|r| table.cell(r, c).unwrap().trim().to_string())
                        .collect();
                    cats.sort();
                    cats.dedup();
                    ColumnEncoding::Label {
                        column: c,
                        categories: cats,
                    }
                }
                Column::OpenAccess => ColumnEncoding::Binary {
                    column: c,
                    yes: OPEN_ACCESS_YES.iter().map(|s| s.to_string()).collect(),
                    no: OPEN_ACCESS_NO.iter().map(|s| s.to_string()).collect(),
                },
                Column::Coverage => ColumnEncoding::Years {
                    column: c,
                    reference_year,
                },
                _ => ColumnEncoding::Number { column: c },
            })
            .collect();
        EncodingMap { columns }
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .map(|e| e.column().feature_name().to_string())
            .collect()
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.columns
            .iter()
            .map(|e| match e {
                ColumnEncoding::Label { .. } => FeatureKind::EncodedCategorical,
                _ => FeatureKind::Numeric,
            })
            .collect()
    }

    pub fn code_of(&self, column: Column, text: &str) -> Option<usize> {
        self.columns.iter().find_map(|e| match e {
            ColumnEncoding::Label { column: c, categories } if *c == column => {
                categories.binary_search_by(|s| s.as_str().cmp(text.trim())).ok()
            }
            _ => None,
        })
    }

    pub fn decode(&self, column: Column, code: usize) -> Option<&str> {
        self.columns.iter().find_map(|e| match e {
            ColumnEncoding::Label { column: c, categories } if *c == column => {
                categories.get(code).map(String::as_str)
            }
            _ => None,
        })
    }

    /// Encode every cell. Missing cells stay `None`.
    pub fn apply(
        &self,
        table: &RawTable,
        unseen: UnseenCategory,
    ) -> Result<NumericTable, PreprocessError> {
        let mut col_idx = Vec::with_capacity(self.columns.len());
        for enc in &self.columns {
            let c = enc.column();
            col_idx.push(
                table
                    .column_index(c)
                    .ok_or_else(|| PreprocessError::UnknownColumn(c.display_name().to_string()))?,
            );
        }
        let mut values = Vec::with_capacity(table.n_rows());
        for (r, row) in table.rows().iter().enumerate() {
            let mut out = Vec::with_capacity(self.columns.len());
            for (enc, &j) in self.columns.iter().zip(&col_idx) {
                let missing = table.missing_mask()[r][j];
                let cell = row[j].as_str();
                out.push(if missing {
                    None
                } else {
                    Some(encode_cell(enc, r, cell, unseen)?)
                });
            }
            values.push(out);
        }
        Ok(NumericTable {
            feature_names: self.feature_names(),
            kinds: self.kinds(),
            values,
        })
    }

    pub fn write_sidecar<W: Write>(&self, out: W) -> Result<(), PreprocessError> {
        write_jsonl(out, &self.columns)
    }

    pub fn read_sidecar<R: BufRead>(input: R) -> Result<EncodingMap, PreprocessError> {
        Ok(EncodingMap {
            columns: read_jsonl(input)?,
        })
    }
}

fn encode_cell(
    enc: &ColumnEncoding,
    row: usize,
    cell: &str,
    unseen: UnseenCategory,
) -> Result<f64, PreprocessError> {
    match enc {
        ColumnEncoding::Label { column, categories } => {
            match categories.binary_search_by(|s| s.as_str().cmp(cell.trim())) {
                Ok(code) => Ok(code as f64),
                Err(_) if unseen == UnseenCategory::ReservedCode => Ok(categories.len() as f64),
                Err(_) => Err(PreprocessError::UnseenCategory {
                    row,
                    column: column.feature_name().to_string(),
                    value: cell.to_string(),
                }),
            }
        }
        ColumnEncoding::Binary { yes, no, .. } => {
            let key = cell.trim().to_lowercase();
            if yes.iter().any(|s| *s == key) {
                Ok(1.0)
            } else if no.iter().any(|s| *s == key) {
                Ok(0.0)
            } else {
                Err(PreprocessError::UnrecognizedOpenAccessValue {
                    row,
                    value: cell.to_string(),
                })
            }
        }
        ColumnEncoding::Years { reference_year, .. } => {
            coverage_years(cell, *reference_year).map_err(|e| match e {
                CoverageError::NoYear => PreprocessError::UnparseableCoverage {
                    row,
                    value: cell.to_string(),
                },
                CoverageError::Future(start) => PreprocessError::FutureStartYear {
                    row,
                    start,
                    reference: *reference_year,
                },
            })
        }
        ColumnEncoding::Number { column } => {
            let ty = match column.column_type() {
                ColumnType::Text => ColumnType::Real,
                t => t,
            };
            // The ingest mask already guarantees this parses.
            Ok(parse_numeric(cell, ty).unwrap_or(f64::NAN))
        }
    }
}

#[derive(Debug, PartialEq)]
enum CoverageError {
    NoYear,
    Future(i32),
}

/// First run of exactly four digits in `text`.
fn first_year(text: &str) -> Option<i32> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 4 {
                return text[start..i].parse().ok();
            }
        } else {
            i += 1;
        }
    }
    None
}

fn coverage_years(text: &str, reference_year: i32) -> Result<f64, CoverageError> {
    let start = first_year(text).ok_or(CoverageError::NoYear)?;
    if start > reference_year {
        return Err(CoverageError::Future(start));
    }
    Ok((reference_year - start + 1) as f64)
}

/// Fit an [`EncodingMap`] and apply it to the same table.
pub fn encode_record_fields(
    table: &RawTable,
    reference_year: i32,
) -> Result<(NumericTable, EncodingMap), PreprocessError> {
    let map = EncodingMap::fit(table, reference_year);
    let numeric = map.apply(table, UnseenCategory::Reject)?;
    Ok((numeric, map))
}

/// Encoded table; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub feature_names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl NumericTable {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    /// Dense copy; fails on the first missing cell.
    pub fn to_dense(&self) -> Result<FeatureMatrix, PreprocessError> {
        let p = self.feature_names.len();
        let mut m = Matrix::zeros(self.values.len(), p);
        for (r, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                match v {
                    Some(x) => m.set(r, c, *x),
                    None => {
                        return Err(PreprocessError::MissingCell {
                            row: r,
                            column: self.feature_names[c].clone(),
                        })
                    }
                }
            }
        }
        Ok(FeatureMatrix::new(
            m,
            self.feature_names.clone(),
            self.kinds.clone(),
        ))
    }
}

impl NumericTable {
    /// Missing cells are written as empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PreprocessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.feature_names)?;
        for row in &self.values {
            w.write_record(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        input: R,
        kinds: Option<Vec<FeatureKind>>,
    ) -> Result<NumericTable, PreprocessError> {
        let (feature_names, values) = parse_header_and_rows(input)?;
        let kinds = kinds.unwrap_or_else(|| vec![FeatureKind::Numeric; feature_names.len()]);
        Ok(NumericTable {
            feature_names,
            kinds,
            values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputePolicy {
    #[default]
    Fail,
    ColumnMedian,
}

/// Per-column fill values (`None` where the column had nothing missing to fill).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputeParams {
    pub policy: ImputePolicy,
    pub fill: Vec<(String, f64)>,
}

impl ImputeParams {
    pub fn apply(&self, table: &NumericTable) -> Result<NumericTable, PreprocessError> {
        let mut out = table.clone();
        for (r, row) in out.values.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                if v.is_none() {
                    let name = &table.feature_names[c];
                    match self.fill.iter().find(|(n, _)| n == name) {
                        Some((_, f)) if self.policy == ImputePolicy::ColumnMedian => *v = Some(*f),
                        _ => {
                            return Err(PreprocessError::MissingCell {
                                row: r,
                                column: name.clone(),
                            })
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Fill missing cells according to `policy`; returns the fitted fill values.
pub fn impute_missing(
    table: &NumericTable,
    policy: ImputePolicy,
) -> Result<(NumericTable, ImputeParams), PreprocessError> {
    let mut fill = Vec::new();
    for (c, name) in table.feature_names.iter().enumerate() {
        let observed: Vec<f64> = table.values.iter().filter_map(|r| r[c]).collect();
        let n_missing = table.n_rows() - observed.len();
        if policy == ImputePolicy::ColumnMedian {
            match median(observed) {
                Some(m) => fill.push((name.clone(), m)),
                None if n_missing > 0 => {
                    return Err(PreprocessError::AllMissingColumn(name.clone()))
                }
                None => {}
            }
        }
    }
    let params = ImputeParams { policy, fill };
    let filled = params.apply(table)?;
    Ok((filled, params))
}

/// Observed range of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub feature: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub columns: Vec<ColumnScale>,
}

impl ScaleParams {
    pub fn fit(x: &FeatureMatrix) -> ScaleParams {
        let columns = (0..x.n_features())
            .map(|c| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for r in 0..x.n_rows() {
                    let v = x.values.get(r, c);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if x.n_rows() == 0 {
                    lo = 0.0;
                    hi = 0.0;
                }
                ColumnScale {
                    feature: x.feature_names[c].clone(),
                    min: lo,
                    max: hi,
                }
            })
            .collect();
        ScaleParams { columns }
    }

    /// Scale with stored ranges; values outside the fitted range are clamped.
    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix, PreprocessError> {
        let idx = self
            .columns
            .iter()
            .map(|s| {
                x.feature_index(&s.feature)
                    .ok_or_else(|| PreprocessError::UnknownColumn(s.feature.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut m = Matrix::zeros(x.n_rows(), idx.len());
        for r in 0..x.n_rows() {
            for (c, (&j, s)) in idx.iter().zip(&self.columns).enumerate() {
                m.set(r, c, s.scale(x.values.get(r, j)));
            }
        }
        Ok(FeatureMatrix::new(
            m,
            self.columns.iter().map(|s| s.feature.clone()).collect(),
            idx.iter().map(|&j| x.kinds[j]).collect(),
        ))
    }

    pub fn write_sidecar<W: Write>(&self, out: W) -> Result<(), PreprocessError> {
        write_jsonl(out, &self.columns)
    }

    pub fn read_sidecar<R: BufRead>(input: R) -> Result<ScaleParams, PreprocessError> {
        Ok(ScaleParams {
            columns: read_jsonl(input)?,
        })
    }
}

impl ColumnScale {
    pub fn scale(&self, v: f64) -> f64 {
        let range = self.max - self.min;
        if range <= 0.0 {
            return 0.0;
        }
        ((v - self.min) / range).clamp(0.0, 1.0)
    }
}

/// Scale every column of a complete table to [0, 1].
pub fn min_max_scale(table: &NumericTable) -> Result<(FeatureMatrix, ScaleParams), PreprocessError> {
    let dense = table.to_dense()?;
    let params = ScaleParams::fit(&dense);
    let scaled = params.apply(&dense)?;
    Ok((scaled, params))
}

fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> Result<(), PreprocessError> {
    for item in items {
        let line =
            serde_json::to_string(item).map_err(|e| PreprocessError::Sidecar(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn read_jsonl<R: BufRead, T: for<'de> Deserialize<'de>>(
    input: R,
) -> Result<Vec<T>, PreprocessError> {
    let mut items = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(
            serde_json::from_str(&line)
                .map_err(|e| PreprocessError::Sidecar(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(items)
}

/// Fitted state of the full preprocessing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    pub encoding: EncodingMap,
    pub impute: ImputeParams,
    pub scale: ScaleParams,
}

/// Output of [`Preprocessor::fit`]: every intermediate stage is kept.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub cleaned: RawTable,
    pub warnings: Vec<String>,
    pub encoded: NumericTable,
    /// Imputed, unscaled features.
    pub dense: FeatureMatrix,
    pub scaled: FeatureMatrix,
    pub fitted: Preprocessor,
}

impl Preprocessor {
    pub fn fit(
        table: &RawTable,
        reference_year: i32,
        policy: ImputePolicy,
    ) -> Result<Preprocessed, PreprocessError> {
        let (cleaned, warnings) = drop_identifier_columns(table);
        let (encoded, encoding) = encode_record_fields(&cleaned, reference_year)?;
        let (imputed, impute) = impute_missing(&encoded, policy)?;
        let dense = imputed.to_dense()?;
        let scale = ScaleParams::fit(&dense);
        let scaled = scale.apply(&dense)?;
        Ok(Preprocessed {
            cleaned,
            warnings,
            encoded,
            dense,
            scaled,
            fitted: Preprocessor {
                encoding,
                impute,
                scale,
            },
        })
    }

    /// Apply the fitted chain to new rows; output is clamped to [0, 1].
    pub fn transform(
        &self,
        table: &RawTable,
        unseen: UnseenCategory,
    ) -> Result<FeatureMatrix, PreprocessError> {
        let (cleaned, _) = drop_identifier_columns(table);
        let encoded = self.encoding.apply(&cleaned, unseen)?;
        let imputed = self.impute.apply(&encoded)?;
        self.scale.apply(&imputed.to_dense()?)
    }
}
