//! Training regimes (percentage split, stratified k-fold), confusion-matrix
//! metrics, and the classifier x feature-set x regime experiment grid.

mod metrics;
mod split;

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    default_roster, train, ClassifierKind, ClassifierSpec, ClassifyError, ForestParams,
};
use crate::featsel::{
    best_first_cfs, chi2_scores, rf_importance, top_k, FeatselError, SelectionMethod,
    DEFAULT_STALL_LIMIT,
};
use crate::preprocess::{FeatureMatrix, PreprocessError, ScaleParams};
use crate::rng::derive_seed;

pub use metrics::{confusion_matrix, metrics, ConfusionMatrix, Metrics};
pub use split::{fold_splits, percentage_split, stratified_k_fold, Split};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("split ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("fold count must be >= 2, got {0}")]
    InvalidFolds(usize),
    #[error("{k} folds requested for {n} rows")]
    KTooLarge { k: usize, n: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label {0} out of range for {1} classes")]
    LabelOutOfRange(usize, usize),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("unknown feature set {0:?}")]
    UnknownFeatureSet(String),
    #[error("duplicate grid entry: {0}")]
    DuplicateGridEntry(String),
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error("feature selection: {0}")]
    Featsel(#[from] FeatselError),
    #[error("classifier: {0}")]
    Classify(#[from] ClassifyError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum Regime {
    Psm { ratio: f64 },
    Cvm { folds: usize },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Psm { .. } => "PSM",
            Regime::Cvm { .. } => "CVM",
        }
    }

    fn validate(&self) -> Result<(), EvalError> {
        match *self {
            Regime::Psm { ratio } if !(ratio > 0.0 && ratio < 1.0) => Err(EvalError::InvalidRatio(ratio)),
            Regime::Cvm { folds } if folds < 2 => Err(EvalError::InvalidFolds(folds)),
            _ => Ok(()),
        }
    }
}

fn regime_rank(name: &str) -> usize {
    match name {
        "CVM" => 0,
        "PSM" => 1,
        _ => 2,
    }
}

/// A feature-set descriptor: `all`, `cfs`, `chi2-<k>` or `rf-<k>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureSet {
    All,
    Cfs,
    Chi2(usize),
    Rf(usize),
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSet::All => f.write_str("all"),
            FeatureSet::Cfs => f.write_str("cfs"),
            FeatureSet::Chi2(k) => write!(f, "chi2-{k}"),
            FeatureSet::Rf(k) => write!(f, "rf-{k}"),
        }
    }
}

impl FromStr for FeatureSet {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let err = || EvalError::UnknownFeatureSet(s.to_string());
        match t.as_str() {
            "all" => return Ok(FeatureSet::All),
            "cfs" => return Ok(FeatureSet::Cfs),
            _ => {}
        }
        let (method, k) = t.split_once('-').ok_or_else(err)?;
        let k: usize = k.parse().map_err(|_| err())?;
        if k == 0 {
            return Err(err());
        }
        match method {
            "chi2" => Ok(FeatureSet::Chi2(k)),
            "rf" => Ok(FeatureSet::Rf(k)),
            _ => Err(err()),
        }
    }
}

impl Serialize for FeatureSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const RANKED_KS: [usize; 5] = [5, 7, 10, 12, 15];

/// CFS plus chi2- and RF-ranked top-k for each of [`RANKED_KS`].
pub fn default_feature_sets() -> Vec<FeatureSet> {
    let mut v = vec![FeatureSet::Cfs];
    v.extend(RANKED_KS.iter().map(|&k| FeatureSet::Chi2(k)));
    v.extend(RANKED_KS.iter().map(|&k| FeatureSet::Rf(k)));
    v
}

/// Where scaling and feature selection are fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// On the training rows of each split or fold.
    #[default]
    PerFold,
    /// Once, on all rows, before splitting.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub regimes: Vec<Regime>,
    pub classifiers: Vec<ClassifierSpec>,
    pub feature_sets: Vec<FeatureSet>,
    pub seed: u64,
    pub selection: SelectionMode,
    pub rf_selection: ForestParams,
    pub stall_limit: usize,
    /// Evaluate grid cells on the rayon pool; the report is identical either way.
    pub parallel: bool,
}

impl ExperimentConfig {
    /// Nine-classifier roster, eleven feature sets, 80/20 split and 10-fold CV.
    pub fn default_grid(seed: u64) -> Self {
        ExperimentConfig {
            regimes: vec![Regime::Psm { ratio: 0.8 }, Regime::Cvm { folds: 10 }],
            classifiers: default_roster(seed),
            feature_sets: default_feature_sets(),
            seed,
            selection: SelectionMode::PerFold,
            rf_selection: ForestParams::random_forest(),
            stall_limit: DEFAULT_STALL_LIMIT,
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        for r in &self.regimes {
            r.validate()?;
        }
        for c in &self.classifiers {
            c.validate()?;
        }
        if self.stall_limit == 0 {
            return Err(FeatselError::InvalidStallLimit.into());
        }
        let dup = |mut v: Vec<String>, what: &str| {
            v.sort();
            match v.windows(2).find(|w| w[0] == w[1]) {
                Some(w) => Err(EvalError::DuplicateGridEntry(format!("{what} {:?}", w[0]))),
                None => Ok(()),
            }
        };
        dup(self.regimes.iter().map(|r| r.name().to_string()).collect(), "regime")?;
        dup(self.classifiers.iter().map(|c| c.name.clone()).collect(), "classifier")?;
        dup(self.feature_sets.iter().map(|f| f.to_string()).collect(), "feature set")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub classifier: String,
    pub feature_set: String,
    pub regime: String,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

/// Position of a classifier name in the canonical report order.
pub fn classifier_rank(name: &str) -> usize {
    let roster = default_roster(0);
    if let Some(i) = roster.iter().position(|s| s.name == name) {
        return i;
    }
    match ClassifierKind::ALL.iter().position(|k| k.as_str() == name) {
        Some(i) => roster.len() + i,
        None => usize::MAX,
    }
}

fn feature_set_key(name: &str) -> (Option<FeatureSet>, &str) {
    (name.parse().ok(), name)
}

impl ReportRow {
    fn canonical_cmp(&self, other: &ReportRow) -> Ordering {
        regime_rank(&self.regime)
            .cmp(&regime_rank(&other.regime))
            .then_with(|| self.regime.cmp(&other.regime))
            .then_with(|| {
                let (a, an) = feature_set_key(&self.feature_set);
                let (b, bn) = feature_set_key(&other.feature_set);
                // Unparseable names sort after every known descriptor.
                a.is_none().cmp(&b.is_none()).then(a.cmp(&b)).then(an.cmp(bn))
            })
            .then_with(|| classifier_rank(&self.classifier).cmp(&classifier_rank(&other.classifier)))
            .then_with(|| self.classifier.cmp(&other.classifier))
    }
}

pub const REPORT_HEADER: [&str; 6] = [
    "classifier",
    "feature_set",
    "regime",
    "precision",
    "recall",
    "accuracy",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn new(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.canonical_cmp(b));
        EvalReport { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, classifier: &str, feature_set: &str, regime: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.classifier == classifier && r.feature_set == feature_set && r.regime == regime)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), EvalError> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        if self.rows.is_empty() {
            wr.write_record(REPORT_HEADER)?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Parses and validates a report; rows are re-sorted canonically.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, EvalError> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(|h| h.to_string()).collect();
        if header != REPORT_HEADER {
            return Err(EvalError::MalformedReport(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, rec) in rd.deserialize::<ReportRow>().enumerate() {
            let row = rec.map_err(|e| EvalError::MalformedReport(format!("row {}: {e}", i + 1)))?;
            for v in [row.precision, row.recall, row.accuracy] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(EvalError::MalformedReport(format!(
                        "row {}: metric {v} outside [0, 1]",
                        i + 1
                    )));
                }
            }
            rows.push(row);
        }
        Ok(EvalReport::new(rows))
    }
}

/// Features chosen for one feature set on one split or fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSelection {
    pub regime: String,
    /// Fold index; 0 for the single split of a percentage-split regime.
    pub fold: usize,
    pub feature_set: FeatureSet,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellConfusion {
    pub classifier: String,
    pub feature_set: String,
    pub regime: String,
    pub matrix: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: EvalReport,
    pub selections: Vec<FoldSelection>,
    pub confusion: Vec<CellConfusion>,
    pub warnings: Vec<String>,
}

/// Resolves every feature set against `x` (already scaled, training rows only).
pub fn select_feature_sets(
    sets: &[FeatureSet],
    x: &FeatureMatrix,
    y: &[usize],
    rf_params: &ForestParams,
    stall_limit: usize,
    seed: u64,
) -> Result<Vec<(FeatureSet, Vec<String>)>, EvalError> {
    let need_chi2 = sets.iter().any(|s| matches!(s, FeatureSet::Chi2(_)));
    let need_rf = sets.iter().any(|s| matches!(s, FeatureSet::Rf(_)));
    let chi2 = if need_chi2 { Some(chi2_scores(x, y)?) } else { None };
    let rf = if need_rf {
        Some(rf_importance(x, y, rf_params, seed)?)
    } else {
        None
    };
    let cfs = if sets.contains(&FeatureSet::Cfs) {
        Some(best_first_cfs(x, y, stall_limit)?.feature_names)
    } else {
        None
    };
    sets.iter()
        .map(|s| {
            let names = match s {
                FeatureSet::All => x.feature_names.clone(),
                FeatureSet::Cfs => cfs.clone().unwrap(),
                FeatureSet::Chi2(k) => top_k(chi2.as_ref().unwrap(), *k, SelectionMethod::Chi2)?.feature_names,
                FeatureSet::Rf(k) => top_k(rf.as_ref().unwrap(), *k, SelectionMethod::Rf)?.feature_names,
            };
            Ok((*s, names))
        })
        .collect()
}

/// Scaling fit on `train` rows of the unscaled `x`, then feature selection
/// on the scaled training rows. Returns the scaled full matrix (held-out rows
/// clamped to the training range) and the selections.
pub fn fit_fold(
    config: &ExperimentConfig,
    x: &FeatureMatrix,
    y: &[usize],
    train: &[usize],
    seed: u64,
) -> Result<(FeatureMatrix, Vec<(FeatureSet, Vec<String>)>), EvalError> {
    let xt = x.select_rows(train);
    let scale = ScaleParams::fit(&xt);
    let scaled = scale.apply(x)?;
    let yt: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let sel = select_feature_sets(
        &config.feature_sets,
        &scaled.select_rows(train),
        &yt,
        &config.rf_selection,
        config.stall_limit,
        seed,
    )?;
    Ok((scaled, sel))
}

/// Signature of the fit-and-predict step: `(spec, train X, train y, test X, test row ids)`.
pub trait FitPredict:
    Fn(&ClassifierSpec, &FeatureMatrix, &[usize], &FeatureMatrix, &[usize]) -> Result<Vec<usize>, EvalError> + Sync
{
}

impl<F> FitPredict for F where
    F: Fn(&ClassifierSpec, &FeatureMatrix, &[usize], &FeatureMatrix, &[usize]) -> Result<Vec<usize>, EvalError>
        + Sync
{
}

fn library_fit_predict(
    spec: &ClassifierSpec,
    xtr: &FeatureMatrix,
    ytr: &[usize],
    xte: &FeatureMatrix,
    _test_rows: &[usize],
) -> Result<Vec<usize>, EvalError> {
    let model = train(spec, xtr, ytr)?;
    Ok(model.predict(&xte.values)?)
}

/// Runs the full grid with the library classifiers. `x` must be unscaled.
pub fn run_experiment(
    config: &ExperimentConfig,
    x: &FeatureMatrix,
    y: &[usize],
) -> Result<ExperimentOutput, EvalError> {
    run_experiment_with(config, x, y, &library_fit_predict)
}

struct PreparedFold {
    regime: usize,
    fold: usize,
    split: Split,
    scaled: FeatureMatrix,
    selection: Vec<(FeatureSet, Vec<String>)>,
}

/// Seed used for the splits of regime number `r` in `config.regimes`.
pub fn regime_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, 0x5eed_0000 + r as u64)
}

/// Seed used for RF importance on fold `f` of regime `r`.
pub fn selection_seed(seed: u64, r: usize, f: usize) -> u64 {
    derive_seed(derive_seed(seed, 0x5e1e_0000 + r as u64), f as u64)
}

pub fn regime_splits(
    regime: &Regime,
    y: &[usize],
    seed: u64,
) -> Result<(Vec<Split>, Vec<String>), EvalError> {
    match *regime {
        Regime::Psm { ratio } => {
            let (s, w) = percentage_split(y, ratio, seed)?;
            Ok((vec![s], w))
        }
        Regime::Cvm { folds } => Ok((fold_splits(&stratified_k_fold(y, folds, seed)?), Vec::new())),
    }
}

pub fn run_experiment_with<F: FitPredict>(
    config: &ExperimentConfig,
    x: &FeatureMatrix,
    y: &[usize],
    fit_predict: &F,
) -> Result<ExperimentOutput, EvalError> {
    config.validate()?;
    if y.len() != x.n_rows() {
        return Err(EvalError::LengthMismatch(y.len(), x.n_rows()));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let code_of = |l: usize| classes.binary_search(&l).ok();
    let mut warnings = Vec::new();

    let global = match config.selection {
        SelectionMode::Global => {
            let all: Vec<usize> = (0..y.len()).collect();
            Some(fit_fold(config, x, y, &all, selection_seed(config.seed, usize::MAX >> 1, 0))?)
        }
        SelectionMode::PerFold => None,
    };

    let mut prepared = Vec::new();
    for (r, regime) in config.regimes.iter().enumerate() {
        let (splits, w) = regime_splits(regime, y, regime_seed(config.seed, r))?;
        warnings.extend(w.into_iter().map(|m| format!("{}: {m}", regime.name())));
        for (f, split) in splits.into_iter().enumerate() {
            let (scaled, selection) = match &global {
                Some((s, sel)) => (s.clone(), sel.clone()),
                None => fit_fold(config, x, y, &split.train, selection_seed(config.seed, r, f))?,
            };
            prepared.push(PreparedFold {
                regime: r,
                fold: f,
                split,
                scaled,
                selection,
            });
        }
    }

    // One task per (fold, feature set, classifier); results land in fixed slots.
    let n_sets = config.feature_sets.len();
    let n_clf = config.classifiers.len();
    let tasks: Vec<(usize, usize, usize)> = (0..prepared.len())
        .flat_map(|p| (0..n_sets).flat_map(move |s| (0..n_clf).map(move |c| (p, s, c))))
        .collect();
    let run = |&(p, s, c): &(usize, usize, usize)| -> Result<ConfusionMatrix, EvalError> {
        let pf = &prepared[p];
        let names = &pf.selection[s].1;
        let sub = pf.scaled.select_features(names)?;
        let xtr = sub.select_rows(&pf.split.train);
        let xte = sub.select_rows(&pf.split.test);
        let ytr: Vec<usize> = pf.split.train.iter().map(|&i| y[i]).collect();
        let pred = fit_predict(&config.classifiers[c], &xtr, &ytr, &xte, &pf.split.test)?;
        if pred.len() != pf.split.test.len() {
            return Err(EvalError::LengthMismatch(pred.len(), pf.split.test.len()));
        }
        let t: Vec<usize> = pf.split.test.iter().map(|&i| code_of(y[i]).unwrap()).collect();
        let q = pred
            .iter()
            .map(|&l| code_of(l).ok_or(EvalError::LabelOutOfRange(l, classes.len())))
            .collect::<Result<Vec<_>, _>>()?;
        confusion_matrix(&t, &q, classes.len())
    };
    let results: Vec<ConfusionMatrix> = if config.parallel {
        tasks.par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        tasks.iter().map(run).collect::<Result<_, _>>()?
    };

    let n_regimes = config.regimes.len();
    let mut pooled = vec![ConfusionMatrix::zeros(classes.len()); n_regimes * n_sets * n_clf];
    for (&(p, s, c), cm) in tasks.iter().zip(&results) {
        let r = prepared[p].regime;
        pooled[(r * n_sets + s) * n_clf + c].add(cm);
    }
    let mut rows = Vec::new();
    let mut confusion = Vec::new();
    for (r, regime) in config.regimes.iter().enumerate() {
        for (s, fs) in config.feature_sets.iter().enumerate() {
            for (c, spec) in config.classifiers.iter().enumerate() {
                let cm = &pooled[(r * n_sets + s) * n_clf + c];
                let m = metrics(cm)?;
                rows.push(ReportRow {
                    classifier: spec.name.clone(),
                    feature_set: fs.to_string(),
                    regime: regime.name().to_string(),
                    precision: m.precision,
                    recall: m.recall,
                    accuracy: m.accuracy,
                });
                confusion.push(CellConfusion {
                    classifier: spec.name.clone(),
                    feature_set: fs.to_string(),
                    regime: regime.name().to_string(),
                    matrix: cm.clone(),
                });
            }
        }
    }
    let selections = prepared
        .iter()
        .flat_map(|pf| {
            pf.selection.iter().map(move |(fs, names)| FoldSelection {
                regime: config.regimes[pf.regime].name().to_string(),
                fold: pf.fold,
                feature_set: *fs,
                features: names.clone(),
            })
        })
        .collect();
    Ok(ExperimentOutput {
        report: EvalReport::new(rows),
        selections,
        confusion,
        warnings,
    })
}
