//! Classifier suite over a shared train / predict contract.
//!
//! Every learner works on integer class codes `0..C` internally; a
//! [`TrainedModel`] maps them back to the labels seen in training.

mod adaboost;
mod forest;
mod gbm;
mod knn;
mod mlp;
mod nb;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::preprocess::FeatureMatrix;

pub use adaboost::{AdaBoost, AdaBoostParams};
pub use forest::{Forest, ForestParams};
pub use gbm::{Gbm, GbmParams, GbmRound};
pub use knn::{Knn, KnnParams};
pub use mlp::{Mlp, MlpParams};
pub use nb::{GaussianNb, NbParams};
pub use tree::{
    build_cart_tree, build_regression_tree, DecisionTree, FeatureSubsample, Node, SplitMode,
    TreeParams,
};

pub const MODEL_FORMAT: &str = "jcat-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("empty training data")]
    EmptyData,
    #[error("feature count {got} does not match training arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("label count {0} does not match row count {1}")]
    LengthMismatch(usize, usize),
    #[error("model serialization: {0}")]
    Serialization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Nb,
    Knn,
    Mlp,
    Cart,
    Bagging,
    Rf,
    Etc,
    Adaboost,
    Gbm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 9] = [
        ClassifierKind::Nb,
        ClassifierKind::Knn,
        ClassifierKind::Mlp,
        ClassifierKind::Cart,
        ClassifierKind::Bagging,
        ClassifierKind::Rf,
        ClassifierKind::Etc,
        ClassifierKind::Adaboost,
        ClassifierKind::Gbm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Cart => "cart",
            ClassifierKind::Bagging => "bagging",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Etc => "etc",
            ClassifierKind::Adaboost => "adaboost",
            ClassifierKind::Gbm => "gbm",
        }
    }

    pub fn default_params(self) -> ModelParams {
        match self {
            ClassifierKind::Nb => ModelParams::Nb(NbParams::default()),
            ClassifierKind::Knn => ModelParams::Knn(KnnParams::default()),
            ClassifierKind::Mlp => ModelParams::Mlp(MlpParams::default()),
            ClassifierKind::Cart => ModelParams::Cart(TreeParams::default()),
            ClassifierKind::Bagging => ModelParams::Bagging(ForestParams::bagging()),
            ClassifierKind::Rf => ModelParams::Rf(ForestParams::random_forest()),
            ClassifierKind::Etc => ModelParams::Etc(ForestParams::extra_trees()),
            ClassifierKind::Adaboost => ModelParams::Adaboost(AdaBoostParams::default()),
            ClassifierKind::Gbm => ModelParams::Gbm(GbmParams::default()),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ClassifyError::InvalidHyperparameter(format!("unknown classifier kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Nb(NbParams),
    Knn(KnnParams),
    Mlp(MlpParams),
    Cart(TreeParams),
    Bagging(ForestParams),
    Rf(ForestParams),
    Etc(ForestParams),
    Adaboost(AdaBoostParams),
    Gbm(GbmParams),
}

impl ModelParams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ModelParams::Nb(_) => ClassifierKind::Nb,
            ModelParams::Knn(_) => ClassifierKind::Knn,
            ModelParams::Mlp(_) => ClassifierKind::Mlp,
            ModelParams::Cart(_) => ClassifierKind::Cart,
            ModelParams::Bagging(_) => ClassifierKind::Bagging,
            ModelParams::Rf(_) => ClassifierKind::Rf,
            ModelParams::Etc(_) => ClassifierKind::Etc,
            ModelParams::Adaboost(_) => ClassifierKind::Adaboost,
            ModelParams::Gbm(_) => ClassifierKind::Gbm,
        }
    }
}

/// A named, fully specified classifier configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub name: String,
    pub params: ModelParams,
    pub seed: u64,
}

fn bad(msg: &str) -> ClassifyError {
    ClassifyError::InvalidHyperparameter(msg.to_string())
}

fn check_tree(t: &TreeParams) -> Result<(), ClassifyError> {
    if t.min_samples_leaf == 0 {
        return Err(bad("min_samples_leaf must be >= 1"));
    }
    if t.max_depth == Some(0) {
        return Err(bad("max_depth must be >= 1"));
    }
    if let FeatureSubsample::Count(0) = t.feature_subsample {
        return Err(bad("feature_subsample count must be >= 1"));
    }
    Ok(())
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        ClassifierSpec {
            name: kind.as_str().to_string(),
            params: kind.default_params(),
            seed,
        }
    }

    pub fn named(name: &str, params: ModelParams, seed: u64) -> Self {
        ClassifierSpec {
            name: name.to_string(),
            params,
            seed,
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        match &self.params {
            ModelParams::Nb(p) => {
                if !(p.var_floor > 0.0) {
                    return Err(bad("var_floor must be > 0"));
                }
            }
            ModelParams::Knn(p) => {
                if p.k == 0 {
                    return Err(bad("k must be >= 1"));
                }
            }
            ModelParams::Mlp(p) => {
                if p.hidden == 0 || p.epochs == 0 || p.batch_size == 0 {
                    return Err(bad("hidden, epochs and batch_size must be >= 1"));
                }
                if !(p.learning_rate > 0.0) {
                    return Err(bad("learning_rate must be > 0"));
                }
                if !(0.0..1.0).contains(&p.momentum) {
                    return Err(bad("momentum must be in [0, 1)"));
                }
            }
            ModelParams::Cart(t) => check_tree(t)?,
            ModelParams::Bagging(p) | ModelParams::Rf(p) | ModelParams::Etc(p) => {
                if p.n_trees == 0 {
                    return Err(bad("n_trees must be >= 1"));
                }
                check_tree(&p.tree)?;
            }
            ModelParams::Adaboost(p) => {
                if p.n_rounds == 0 {
                    return Err(bad("n_rounds must be >= 1"));
                }
            }
            ModelParams::Gbm(p) => {
                if p.n_rounds == 0 || p.max_depth == 0 {
                    return Err(bad("n_rounds and max_depth must be >= 1"));
                }
                if !(p.learning_rate > 0.0) {
                    return Err(bad("learning_rate must be > 0"));
                }
                if !(p.subsample > 0.0 && p.subsample <= 1.0) {
                    return Err(bad("subsample must be in (0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// Display names of the boosted-tree stand-ins.
pub const GBM_PROXY_NAMES: [&str; 3] = ["XGB (gbm-proxy)", "CB (gbm-proxy)", "L-GBM (gbm-proxy)"];

/// The nine-entry roster in canonical report order.
pub fn default_roster(seed: u64) -> Vec<ClassifierSpec> {
    use crate::rng::derive_seed;
    let proxy = GbmParams {
        subsample: 0.8,
        ..GbmParams::default()
    };
    let s = |i: u64| derive_seed(seed, i);
    vec![
        ClassifierSpec::named("NB", ClassifierKind::Nb.default_params(), s(0)),
        ClassifierSpec::named("MLP", ClassifierKind::Mlp.default_params(), s(1)),
        ClassifierSpec::named("Bagging", ClassifierKind::Bagging.default_params(), s(2)),
        ClassifierSpec::named("RF", ClassifierKind::Rf.default_params(), s(3)),
        ClassifierSpec::named(GBM_PROXY_NAMES[0], ModelParams::Gbm(proxy.clone()), s(4)),
        ClassifierSpec::named(GBM_PROXY_NAMES[1], ModelParams::Gbm(proxy.clone()), s(5)),
        ClassifierSpec::named(GBM_PROXY_NAMES[2], ModelParams::Gbm(proxy), s(6)),
        ClassifierSpec::named("ETC", ClassifierKind::Etc.default_params(), s(7)),
        ClassifierSpec::named("AdaBoost", ClassifierKind::Adaboost.default_params(), s(8)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FittedModel {
    Nb(GaussianNb),
    Knn(Knn),
    Mlp(Mlp),
    Cart(DecisionTree),
    Forest(Forest),
    Adaboost(AdaBoost),
    Gbm(Gbm),
}

impl FittedModel {
    fn proba_row(&self, row: &[f64]) -> Vec<f64> {
        match self {
            FittedModel::Nb(m) => m.predict_proba_row(row),
            FittedModel::Knn(m) => m.predict_proba_row(row),
            FittedModel::Mlp(m) => m.predict_proba_row(row),
            FittedModel::Cart(t) => t.predict_row(row).to_vec(),
            FittedModel::Forest(m) => m.predict_proba_row(row),
            FittedModel::Adaboost(m) => m.predict_proba_row(row),
            FittedModel::Gbm(m) => m.predict_proba_row(row),
        }
    }
}

/// An immutable fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub kind: ClassifierKind,
    /// Sorted labels seen in training; internal code `i` is `class_labels[i]`.
    pub class_labels: Vec<usize>,
    pub feature_names: Vec<String>,
    pub fitted: FittedModel,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions {
    /// Grow ensemble members on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

pub fn train(
    spec: &ClassifierSpec,
    x: &FeatureMatrix,
    y: &[usize],
) -> Result<TrainedModel, ClassifyError> {
    train_with(spec, x, y, TrainOptions::default())
}

pub fn train_with(
    spec: &ClassifierSpec,
    x: &FeatureMatrix,
    y: &[usize],
    opts: TrainOptions,
) -> Result<TrainedModel, ClassifyError> {
    spec.validate()?;
    let n = x.n_rows();
    if n == 0 || x.n_features() == 0 {
        return Err(ClassifyError::EmptyData);
    }
    if y.len() != n {
        return Err(ClassifyError::LengthMismatch(y.len(), n));
    }
    if n < 2 {
        return Err(ClassifyError::DegenerateData("at least 2 rows are required".into()));
    }
    if x.values.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(ClassifyError::DegenerateData("non-finite feature value".into()));
    }
    let mut class_labels = y.to_vec();
    class_labels.sort_unstable();
    class_labels.dedup();
    if class_labels.len() < 2 {
        return Err(ClassifyError::SingleClass);
    }
    let codes: Vec<usize> = y
        .iter()
        .map(|l| class_labels.binary_search(l).expect("label present"))
        .collect();
    let c = class_labels.len();
    let m = &x.values;
    let seed = spec.seed;
    let fitted = match &spec.params {
        ModelParams::Nb(p) => FittedModel::Nb(GaussianNb::fit(m, &codes, c, p)),
        ModelParams::Knn(p) => {
            if p.k > n {
                return Err(ClassifyError::DegenerateData(format!(
                    "k = {} exceeds {n} training rows",
                    p.k
                )));
            }
            FittedModel::Knn(Knn::fit(m, &codes, c, p))
        }
        ModelParams::Mlp(p) => FittedModel::Mlp(Mlp::fit(m, &codes, c, p, seed)),
        ModelParams::Cart(p) => {
            FittedModel::Cart(build_cart_tree(m, &codes, &vec![1.0; n], c, p, seed)?)
        }
        ModelParams::Bagging(p) | ModelParams::Rf(p) | ModelParams::Etc(p) => {
            FittedModel::Forest(Forest::fit(m, &codes, c, p, seed, opts.parallel)?)
        }
        ModelParams::Adaboost(p) => FittedModel::Adaboost(AdaBoost::fit(m, &codes, c, p, seed)?),
        ModelParams::Gbm(p) => FittedModel::Gbm(Gbm::fit(m, &codes, c, p, seed)?),
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        name: spec.name.clone(),
        kind: spec.kind(),
        class_labels,
        feature_names: x.feature_names.clone(),
        fitted,
    })
}

impl TrainedModel {
    fn check_arity(&self, x: &Matrix) -> Result<(), ClassifyError> {
        if x.n_cols() != self.feature_names.len() {
            return Err(ClassifyError::ArityMismatch {
                expected: self.feature_names.len(),
                got: x.n_cols(),
            });
        }
        Ok(())
    }

    /// Per-row distribution over `class_labels`.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<Vec<f64>>, ClassifyError> {
        self.check_arity(x)?;
        Ok(x.rows().map(|r| self.fitted.proba_row(r)).collect())
    }

    /// Argmax of `predict_proba`, ties to the lowest class.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, ClassifyError> {
        Ok(self
            .predict_proba(x)?
            .iter()
            .map(|p| self.class_labels[tree::argmax(p)])
            .collect())
    }

    pub fn to_json(&self) -> Result<String, ClassifyError> {
        serde_json::to_string(self).map_err(|e| ClassifyError::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, ClassifyError> {
        let m: TrainedModel =
            serde_json::from_str(s).map_err(|e| ClassifyError::Serialization(e.to_string()))?;
        if m.format != MODEL_FORMAT {
            return Err(ClassifyError::Serialization(format!(
                "unexpected format tag {:?}",
                m.format
            )));
        }
        if m.version != MODEL_VERSION {
            return Err(ClassifyError::Serialization(format!(
                "unsupported model version {}",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
