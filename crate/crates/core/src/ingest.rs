//! Loading, validating and synthesizing the 20-column journal table.
//!
//! Headers are matched case- and whitespace-insensitively against a fixed
//! canonical name per column. Cells that cannot be read as the column's type
//! are flagged in a missing mask; the raw text is always kept so that a table
//! written back out reloads identically.

use std::fmt;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column \"{0}\"")]
    MissingColumn(String),
    #[error("duplicate column \"{0}\"")]
    DuplicateColumn(String),
    #[error("table has no data rows")]
    EmptyTable,
    #[error("synthetic dataset needs at least 9 rows, got {0}")]
    InvalidSize(usize),
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Value type of a column, used to decide when a cell counts as missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Text,
    Real,
    Integer,
}

/// The twenty journal attributes, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Column {
    FullTitle,
    Issn,
    Publisher,
    JournalImpactFactor,
    JournalHomepage,
    Website,
    CiteScore,
    Sjr,
    Snip,
    Country,
    Coverage,
    HirschIndex,
    EigenfactorScore,
    ArticleInfluenceScore,
    ImmediacyIndex,
    CitedHalfLife,
    TotalArticles,
    OpenAccess,
    FiveYearImpactFactor,
    IssuesPerYear,
}

impl Column {
    pub const ALL: [Column; 20] = [
        Column::FullTitle,
        Column::Issn,
        Column::Publisher,
        Column::JournalImpactFactor,
        Column::JournalHomepage,
        Column::Website,
        Column::CiteScore,
        Column::Sjr,
        Column::Snip,
        Column::Country,
        Column::Coverage,
        Column::HirschIndex,
        Column::EigenfactorScore,
        Column::ArticleInfluenceScore,
        Column::ImmediacyIndex,
        Column::CitedHalfLife,
        Column::TotalArticles,
        Column::OpenAccess,
        Column::FiveYearImpactFactor,
        Column::IssuesPerYear,
    ];

    /// Header text written on output.
    pub fn display_name(self) -> &'static str {
        match self {
            Column::FullTitle => "Full Title",
            Column::Issn => "ISSN",
            Column::Publisher => "Publisher",
            Column::JournalImpactFactor => "Journal Impact Factor",
            Column::JournalHomepage => "Journal Homepage",
            Column::Website => "Website",
            Column::CiteScore => "Cite Score",
            Column::Sjr => "SJR",
            Column::Snip => "SNIP",
            Column::Country => "Country",
            Column::Coverage => "Coverage",
            Column::HirschIndex => "Hirsch Index",
            Column::EigenfactorScore => "Eigen Factor Score",
            Column::ArticleInfluenceScore => "Article Influence Score",
            Column::ImmediacyIndex => "Immediacy Index",
            Column::CitedHalfLife => "Cited Half Life",
            Column::TotalArticles => "Total Articles",
            Column::OpenAccess => "Open Access",
            Column::FiveYearImpactFactor => "5 Years Impact Factor",
            Column::IssuesPerYear => "No. of Issues per Year",
        }
    }

    /// Feature name used once the column becomes a numeric feature.
    pub fn feature_name(self) -> &'static str {
        match self {
            Column::FullTitle => "full_title",
            Column::Issn => "issn",
            Column::Publisher => "publisher",
            Column::JournalImpactFactor => "journal_impact_factor",
            Column::JournalHomepage => "journal_homepage",
            Column::Website => "website",
            Column::CiteScore => "cite_score",
            Column::Sjr => "sjr",
            Column::Snip => "snip",
            Column::Country => "country",
            Column::Coverage => "coverage_years",
            Column::HirschIndex => "hirsch_index",
            Column::EigenfactorScore => "eigenfactor_score",
            Column::ArticleInfluenceScore => "article_influence_score",
            Column::ImmediacyIndex => "immediacy_index",
            Column::CitedHalfLife => "cited_half_life",
            Column::TotalArticles => "total_articles",
            Column::OpenAccess => "open_access",
            Column::FiveYearImpactFactor => "five_year_impact_factor",
            Column::IssuesPerYear => "issues_per_year",
        }
    }

    pub fn column_type(self) -> ColumnType {
        match self {
            Column::FullTitle
            | Column::Issn
            | Column::Publisher
            | Column::JournalHomepage
            | Column::Website
            | Column::Country
            | Column::Coverage
            | Column::OpenAccess => ColumnType::Text,
            Column::HirschIndex | Column::TotalArticles | Column::IssuesPerYear => {
                ColumnType::Integer
            }
            _ => ColumnType::Real,
        }
    }

    /// Resolve a header against the canonical names and a few common aliases.
    pub fn from_header(header: &str) -> Option<Column> {
        let key = canonical_key(header);
        if let Some(c) = Column::ALL
            .iter()
            .copied()
            .find(|c| canonical_key(c.display_name()) == key)
        {
            return Some(c);
        }
        let alias = match key.as_str() {
            "title" | "journaltitle" => Column::FullTitle,
            "homepage" | "journalhomepageurl" => Column::JournalHomepage,
            "citescore" => Column::CiteScore,
            "jif" | "impactfactor" => Column::JournalImpactFactor,
            "hindex" | "hirschindexhindex" => Column::HirschIndex,
            "eigenfactor" => Column::EigenfactorScore,
            "immediacyscore" | "immediacyscoreindex" | "immediacyfactor" => Column::ImmediacyIndex,
            "citedhalflifeyears" => Column::CitedHalfLife,
            "fiveyearimpactfactor" | "5yearimpactfactor" | "fiveyearsimpactfactor" => {
                Column::FiveYearImpactFactor
            }
            "issuesperyear" | "numberofissuesperyear" => Column::IssuesPerYear,
            _ => return None,
        };
        Some(alias)
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

fn canonical_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// True for the textual missing markers: empty, `N/A`, `NA`, `-`.
pub fn is_missing_marker(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("n/a") || t.eq_ignore_ascii_case("na") || t == "-"
}

/// Parse a cell under the type of `column`; `None` means the cell is missing.
pub fn parse_numeric(cell: &str, ty: ColumnType) -> Option<f64> {
    if is_missing_marker(cell) {
        return None;
    }
    let v: f64 = cell.trim().parse().ok()?;
    if !v.is_finite() || v < 0.0 {
        return None;
    }
    if ty == ColumnType::Integer && v.fract() != 0.0 {
        return None;
    }
    Some(v)
}

fn cell_is_missing(cell: &str, column: Column) -> bool {
    match column.column_type() {
        ColumnType::Text => is_missing_marker(cell),
        ty => parse_numeric(cell, ty).is_none(),
    }
}

/// One journal with typed fields. Numeric fields are `None` when missing.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalRecord {
    pub full_title: String,
    pub issn: String,
    pub publisher: String,
    pub journal_impact_factor: Option<f64>,
    pub journal_homepage: String,
    pub website: String,
    pub cite_score: Option<f64>,
    pub sjr: Option<f64>,
    pub snip: Option<f64>,
    pub country: String,
    pub coverage: String,
    pub hirsch_index: Option<u64>,
    pub eigenfactor_score: Option<f64>,
    pub article_influence_score: Option<f64>,
    pub immediacy_index: Option<f64>,
    pub cited_half_life: Option<f64>,
    pub total_articles: Option<u64>,
    pub open_access: String,
    pub five_year_impact_factor: Option<f64>,
    pub issues_per_year: Option<u64>,
}

impl JournalRecord {
    fn cells(&self) -> Vec<String> {
        fn real(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        fn int(v: Option<u64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        Column::ALL
            .iter()
            .map(|c| match c {
                Column::FullTitle => self.full_title.clone(),
                Column::Issn => self.issn.clone(),
                Column::Publisher => self.publisher.clone(),
                Column::JournalImpactFactor => real(self.journal_impact_factor),
                Column::JournalHomepage => self.journal_homepage.clone(),
                Column::Website => self.website.clone(),
                Column::CiteScore => real(self.cite_score),
                Column::Sjr => real(self.sjr),
                Column::Snip => real(self.snip),
                Column::Country => self.country.clone(),
                Column::Coverage => self.coverage.clone(),
                Column::HirschIndex => int(self.hirsch_index),
                Column::EigenfactorScore => real(self.eigenfactor_score),
                Column::ArticleInfluenceScore => real(self.article_influence_score),
                Column::ImmediacyIndex => real(self.immediacy_index),
                Column::CitedHalfLife => real(self.cited_half_life),
                Column::TotalArticles => int(self.total_articles),
                Column::OpenAccess => self.open_access.clone(),
                Column::FiveYearImpactFactor => real(self.five_year_impact_factor),
                Column::IssuesPerYear => int(self.issues_per_year),
            })
            .collect()
    }
}

/// Tabular journal data with an explicit per-cell missing mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<Column>,
    rows: Vec<Vec<String>>,
    missing: Vec<Vec<bool>>,
}

impl RawTable {
    /// Build a table from already-split cells, computing the missing mask.
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<String>>) -> Result<Self, IngestError> {
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(IngestError::DuplicateColumn(c.display_name().to_string()));
            }
        }
        let mut missing = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(IngestError::RaggedRow {
                    row: r,
                    found: row.len(),
                    expected: columns.len(),
                });
            }
            missing.push(
                row.iter()
                    .zip(&columns)
                    .map(|(cell, &c)| cell_is_missing(cell, c))
                    .collect(),
            );
        }
        Ok(RawTable {
            columns,
            rows,
            missing,
        })
    }

    pub fn from_records(records: &[JournalRecord]) -> Self {
        let rows = records.iter().map(JournalRecord::cells).collect();
        RawTable::new(Column::ALL.to_vec(), rows).expect("records have the full schema")
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_index(&self, column: Column) -> Option<usize> {
        self.columns.iter().position(|&c| c == column)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn cell(&self, row: usize, column: Column) -> Option<&str> {
        let j = self.column_index(column)?;
        Some(self.rows[row][j].as_str())
    }

    pub fn is_missing(&self, row: usize, column: Column) -> bool {
        self.column_index(column)
            .map(|j| self.missing[row][j])
            .unwrap_or(true)
    }

    pub fn missing_mask(&self) -> &[Vec<bool>] {
        &self.missing
    }

    /// Typed view of a row; only available on tables with the full schema.
    pub fn record(&self, row: usize) -> Option<JournalRecord> {
        let text = |c: Column| self.cell(row, c).map(str::to_string);
        let real = |c: Column| -> Option<Option<f64>> {
            let cell = self.cell(row, c)?;
            Some(parse_numeric(cell, c.column_type()))
        };
        let int = |c: Column| real(c).map(|v| v.map(|x| x as u64));
        Some(JournalRecord {
            full_title: text(Column::FullTitle)?,
            issn: text(Column::Issn)?,
            publisher: text(Column::Publisher)?,
            journal_impact_factor: real(Column::JournalImpactFactor)?,
            journal_homepage: text(Column::JournalHomepage)?,
            website: text(Column::Website)?,
            cite_score: real(Column::CiteScore)?,
            sjr: real(Column::Sjr)?,
            snip: real(Column::Snip)?,
            country: text(Column::Country)?,
            coverage: text(Column::Coverage)?,
            hirsch_index: int(Column::HirschIndex)?,
            eigenfactor_score: real(Column::EigenfactorScore)?,
            article_influence_score: real(Column::ArticleInfluenceScore)?,
            immediacy_index: real(Column::ImmediacyIndex)?,
            cited_half_life: real(Column::CitedHalfLife)?,
            total_articles: int(Column::TotalArticles)?,
            open_access: text(Column::OpenAccess)?,
            five_year_impact_factor: real(Column::FiveYearImpactFactor)?,
            issues_per_year: int(Column::IssuesPerYear)?,
        })
    }

    /// Copy of the table without `drop`; row order is kept.
    pub fn without_columns(&self, drop: &[Column]) -> RawTable {
        let keep: Vec<usize> = (0..self.columns.len())
            .filter(|&j| !drop.contains(&self.columns[j]))
            .collect();
        RawTable {
            columns: keep.iter().map(|&j| self.columns[j]).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&j| r[j].clone()).collect())
                .collect(),
            missing: self
                .missing
                .iter()
                .map(|r| keep.iter().map(|&j| r[j]).collect())
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.display_name()))?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parse a journal CSV. All twenty columns must be present (in any order);
/// unknown extra columns are ignored. Stored columns follow canonical order.
pub fn load_table<R: Read>(source: R) -> Result<RawTable, IngestError> {
    load_table_with(source, &Column::ALL)
}

/// Like [`load_table`] but only `required` columns must be present.
pub fn load_table_with<R: Read>(source: R, required: &[Column]) -> Result<RawTable, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let mut positions: Vec<(Column, usize)> = Vec::new();
    for (idx, h) in headers.iter().enumerate() {
        if let Some(c) = Column::from_header(h) {
            if positions.iter().any(|&(seen, _)| seen == c) {
                return Err(IngestError::DuplicateColumn(h.trim().to_string()));
            }
            positions.push((c, idx));
        }
    }
    for &c in required {
        if !positions.iter().any(|&(seen, _)| seen == c) {
            return Err(IngestError::MissingColumn(c.display_name().to_string()));
        }
    }
    positions.sort_by_key(|&(c, _)| c);

    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        rows.push(
            positions
                .iter()
                .map(|&(_, idx)| rec.get(idx).unwrap_or("").to_string())
                .collect(),
        );
    }
    if rows.is_empty() {
        return Err(IngestError::EmptyTable);
    }
    RawTable::new(positions.into_iter().map(|(c, _)| c).collect(), rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Missing-cell count per column, in table column order.
    pub missing_per_column: Vec<(Column, usize)>,
    pub rows_with_missing: usize,
    pub total_missing: usize,
}

pub fn validate_schema(table: &RawTable) -> ValidationReport {
    let mut per_col = vec![0usize; table.columns.len()];
    let mut rows_with_missing = 0;
    for row in &table.missing {
        let mut any = false;
        for (j, &m) in row.iter().enumerate() {
            if m {
                per_col[j] += 1;
                any = true;
            }
        }
        rows_with_missing += any as usize;
    }
    ValidationReport {
        total_missing: per_col.iter().sum(),
        missing_per_column: table.columns.iter().copied().zip(per_col).collect(),
        rows_with_missing,
    }
}

/// Latent quality tier of a synthetic journal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    Low,
    Medium,
    High,
}

impl Tier {
    fn level(self) -> f64 {
        match self {
            Tier::Low => 0.0,
            Tier::Medium => 1.0,
            Tier::High => 2.0,
        }
    }
}

/// Synthetic table plus the tier each row was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub table: RawTable,
    pub tiers: Vec<Tier>,
}

const PUBLISHERS: [&str; 6] = [
    "Elsevier",
    "IEEE",
    "MDPI",
    "Springer",
    "Taylor & Francis",
    "Wiley",
];
const COUNTRIES: [&str; 6] = [
    "Germany",
    "Netherlands",
    "Pakistan",
    "Switzerland",
    "UK",
    "United States",
];

// (low-tier mean, standard deviation); tier means step by 4 sd.
const IF_PARAMS: (f64, f64) = (1.5, 0.5);
const CITESCORE_PARAMS: (f64, f64) = (2.4, 0.8);
const SJR_PARAMS: (f64, f64) = (0.45, 0.15);
const SNIP_PARAMS: (f64, f64) = (0.6, 0.2);
const HINDEX_PARAMS: (f64, f64) = (24.0, 8.0);
const EIGEN_PARAMS: (f64, f64) = (0.006, 0.002);
const AIS_PARAMS: (f64, f64) = (0.6, 0.2);
const IMMEDIACY_PARAMS: (f64, f64) = (0.45, 0.15);
const FIVE_YEAR_PARAMS: (f64, f64) = (1.8, 0.6);
const TIER_STEP_SDS: f64 = 4.0;

/// Deterministic synthetic journal table with three balanced latent tiers.
pub fn synthesize_dataset(n: usize, seed: u64) -> Result<SyntheticDataset, IngestError> {
    if n < 9 {
        return Err(IngestError::InvalidSize(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tiers: Vec<Tier> = (0..n)
        .map(|i| match i % 3 {
            0 => Tier::High,
            1 => Tier::Medium,
            _ => Tier::Low,
        })
        .collect();
    tiers.shuffle(&mut rng);

    let records: Vec<JournalRecord> = tiers
        .iter()
        .enumerate()
        .map(|(i, &tier)| synth_record(i, tier, &mut rng))
        .collect();
    Ok(SyntheticDataset {
        table: RawTable::from_records(&records),
        tiers,
    })
}

fn synth_record(i: usize, tier: Tier, rng: &mut ChaCha8Rng) -> JournalRecord {
    let level = tier.level();
    let mut indicator = |(low, sd): (f64, f64), decimals: i32| -> f64 {
        let mean = low + level * TIER_STEP_SDS * sd;
        let v = Normal::new(mean, sd).unwrap().sample(rng).max(0.0);
        round_to(v, decimals)
    };
    let jif = indicator(IF_PARAMS, 3);
    let cite = indicator(CITESCORE_PARAMS, 2);
    let sjr = indicator(SJR_PARAMS, 3);
    let snip = indicator(SNIP_PARAMS, 3);
    let h = indicator(HINDEX_PARAMS, 0);
    let eigen = indicator(EIGEN_PARAMS, 5);
    let ais = indicator(AIS_PARAMS, 3);
    let imm = indicator(IMMEDIACY_PARAMS, 3);
    let five = indicator(FIVE_YEAR_PARAMS, 3);

    let half_life = round_to(Normal::new(6.0f64, 1.5).unwrap().sample(rng).max(0.5), 1);
    let issues = [4u64, 6, 12, 24][rng.random_range(0..4)];
    let start_year = 2015 - (level as i64 * 15) - rng.random_range(0..15i64);
    let coverage = if rng.random_bool(0.5) {
        format!("{start_year}-present")
    } else {
        format!("{start_year}-2021")
    };
    let open_prob = 0.2 + 0.3 * level;
    let open_access = if rng.random_bool(open_prob) { "Yes" } else { "No" };
    let publisher = PUBLISHERS[rng.random_range(0..PUBLISHERS.len())];
    let country = COUNTRIES[rng.random_range(0..COUNTRIES.len())];

    JournalRecord {
        full_title: format!("Journal of Synthetic Studies {:04}", i + 1),
        issn: format!("{:04}-{:04}", 1000 + i / 10_000, i % 10_000),
        publisher: publisher.to_string(),
        journal_impact_factor: Some(jif),
        journal_homepage: format!("https://journals.example.org/j{:04}", i + 1),
        website: format!("https://j{:04}.example.org", i + 1),
        cite_score: Some(cite),
        sjr: Some(sjr),
        snip: Some(snip),
        country: country.to_string(),
        coverage,
        hirsch_index: Some(h as u64),
        eigenfactor_score: Some(eigen),
        article_influence_score: Some(ais),
        immediacy_index: Some(imm),
        cited_half_life: Some(half_life),
        total_articles: None,
        open_access: open_access.to_string(),
        five_year_impact_factor: Some(five),
        issues_per_year: Some(issues),
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (v * p).round() / p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        Column::ALL
            .iter()
            .map(|c| c.display_name())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn valid_row(i: usize) -> String {
        format!(
            "Journal {i},1234-000{i},Wiley,2.5,https://h{i},https://w{i},4.1,0.9,1.1,UK,\
             1999-present,55,0.01,0.8,0.4,7.5,120,Yes,2.9,12"
        )
    }

    #[test]
    fn loads_well_formed_csv() {
        let csv = format!("{}\n{}\n{}\n{}\n", header(), valid_row(1), valid_row(2), valid_row(3));
        let t = load_table(csv.as_bytes()).unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.columns().len(), 20);
        assert_eq!(validate_schema(&t).total_missing, 0);
    }

    #[test]
    fn missing_column_is_named() {
        let hdr: Vec<_> = Column::ALL
            .iter()
            .filter(|&&c| c != Column::Snip)
            .map(|c| c.display_name())
            .collect();
        let csv = format!("{}\n", hdr.join(","));
        match load_table(csv.as_bytes()) {
            Err(IngestError::MissingColumn(name)) => assert_eq!(name, "SNIP"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_empty() {
        let csv = format!("{},snip\n{},1\n", header(), valid_row(1));
        assert!(matches!(
            load_table(csv.as_bytes()),
            Err(IngestError::DuplicateColumn(_))
        ));
        let csv = format!("{}\n", header());
        assert!(matches!(load_table(csv.as_bytes()), Err(IngestError::EmptyTable)));
    }

    #[test]
    fn headers_are_case_and_space_insensitive() {
        assert_eq!(Column::from_header("  cite score "), Some(Column::CiteScore));
        assert_eq!(Column::from_header("CITESCORE"), Some(Column::CiteScore));
        assert_eq!(Column::from_header("Cited-half life"), Some(Column::CitedHalfLife));
        assert_eq!(
            Column::from_header("5 years impact factor"),
            Some(Column::FiveYearImpactFactor)
        );
        assert_eq!(Column::from_header("Immediacy Score/index"), Some(Column::ImmediacyIndex));
        assert_eq!(Column::from_header("volume"), None);
    }

    #[test]
    fn na_cell_is_masked_not_zeroed() {
        let bad = valid_row(2).replacen(",4.1,", ",N/A,", 1);
        let csv = format!("{}\n{}\n{}\n{}\n", header(), valid_row(1), bad, valid_row(3));
        let t = load_table(csv.as_bytes()).unwrap();
        assert!(t.is_missing(1, Column::CiteScore));
        assert!(!t.is_missing(0, Column::CiteScore));
        assert_eq!(t.cell(1, Column::CiteScore), Some("N/A"));
        assert_eq!(t.record(1).unwrap().cite_score, None);
    }

    #[test]
    fn missing_markers() {
        for m in ["", " ", "N/A", "n/a", "NA", "na", "-"] {
            assert!(is_missing_marker(m), "{m:?}");
        }
        assert!(!is_missing_marker("0"));
        assert_eq!(parse_numeric("3.5", ColumnType::Integer), None);
        assert_eq!(parse_numeric("-1", ColumnType::Real), None);
        assert_eq!(parse_numeric("inf", ColumnType::Real), None);
        assert_eq!(parse_numeric("12", ColumnType::Integer), Some(12.0));
    }

    #[test]
    fn validation_counts_total_articles_gap() {
        let ds = synthesize_dataset(30, 3).unwrap();
        let rep = validate_schema(&ds.table);
        let (_, n) = rep
            .missing_per_column
            .iter()
            .find(|(c, _)| *c == Column::TotalArticles)
            .unwrap();
        assert_eq!(*n, 30);
        assert_eq!(rep.rows_with_missing, 30);
    }

    #[test]
    fn scattered_missing_matches_brute_force_scan() {
        let text = format!(
            "{}\n{}\n{}\n{}\n{}\n{}\n",
            header(),
            valid_row(1).replacen(",0.9,", ",-,", 1),
            valid_row(2),
            valid_row(3).replacen(",UK,", ",,", 1),
            valid_row(4).replacen(",55,", ",abc,", 1),
            valid_row(5),
        );
        let t = load_table(text.as_bytes()).unwrap();
        let brute = t.missing_mask().iter().flatten().filter(|&&m| m).count();
        let rep = validate_schema(&t);
        assert_eq!(brute, 3);
        assert_eq!(rep.total_missing, 3);
        assert_eq!(rep.rows_with_missing, 3);
    }

    #[test]
    fn synth_is_deterministic_and_balanced() {
        let a = synthesize_dataset(340, 7).unwrap();
        let b = synthesize_dataset(340, 7).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        a.table.write_csv(&mut ba).unwrap();
        b.table.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb);

        let small = synthesize_dataset(9, 1).unwrap();
        for tier in [Tier::Low, Tier::Medium, Tier::High] {
            assert_eq!(small.tiers.iter().filter(|&&t| t == tier).count(), 3);
        }
        assert!(matches!(synthesize_dataset(8, 1), Err(IngestError::InvalidSize(8))));
    }

    #[test]
    fn synth_tiers_order_impact_factor() {
        let ds = synthesize_dataset(340, 7).unwrap();
        let mean = |tier: Tier| {
            let v: Vec<f64> = (0..ds.table.n_rows())
                .filter(|&i| ds.tiers[i] == tier)
                .map(|i| ds.table.record(i).unwrap().journal_impact_factor.unwrap())
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(Tier::High) > mean(Tier::Medium));
        assert!(mean(Tier::Medium) > mean(Tier::Low));
    }

    #[test]
    fn csv_round_trip() {
        let ds = synthesize_dataset(20, 11).unwrap();
        let mut buf = Vec::new();
        ds.table.write_csv(&mut buf).unwrap();
        let back = load_table(buf.as_slice()).unwrap();
        assert_eq!(back, ds.table);
    }
}
