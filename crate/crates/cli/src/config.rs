//! Run configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! input = "journals.csv"        # relative to this file
//! output = "out"                # relative to this file
//! seed = 2021
//! reference_year = 2021
//! k_clusters = 3
//! impute = "fail"               # or "column-median"
//! formats = ["csv", "markdown", "svg"]
//! paper_faithful_selection = false
//! parallel = true
//!
//! [gower]
//! categorical_match = false
//!
//! [evaluation]
//! psm_ratio = 0.8
//! folds = 10
//! feature_sets = ["cfs", "chi2-5", "rf-5"]
//! stall_limit = 5
//! rf_selection_trees = 100
//!
//! [[classifiers]]               # omit for the default nine-entry roster
//! name = "RF-small"
//! kind = "rf"
//! params = { n_trees = 20 }
//! ```

use std::path::{Path, PathBuf};

use jcat_core::classify::{default_roster, ClassifierKind, ClassifierSpec, ModelParams};
use jcat_core::evaluate::{
    default_feature_sets, ExperimentConfig, FeatureSet, Regime, SelectionMode,
};
use jcat_core::featsel::DEFAULT_STALL_LIMIT;
use jcat_core::preprocess::{ImputePolicy, DEFAULT_REFERENCE_YEAR};
use jcat_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

use crate::failure::{config, CmdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GowerSection {
    pub categorical_match: bool,
}

impl Default for GowerSection {
    fn default() -> Self {
        GowerSection {
            categorical_match: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub psm_ratio: f64,
    pub folds: usize,
    pub feature_sets: Vec<String>,
    pub stall_limit: usize,
    pub rf_selection_trees: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            psm_ratio: 0.8,
            folds: 10,
            feature_sets: default_feature_sets().iter().map(|f| f.to_string()).collect(),
            stall_limit: DEFAULT_STALL_LIMIT,
            rf_selection_trees: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierEntry {
    pub name: String,
    pub kind: String,
    pub seed: Option<u64>,
    /// Overrides merged onto the kind's defaults.
    #[serde(default)]
    pub params: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub reference_year: i32,
    pub k_clusters: usize,
    pub impute: ImputePolicy,
    pub formats: Vec<ReportFormat>,
    pub paper_faithful_selection: bool,
    pub parallel: bool,
    pub gower: GowerSection,
    pub evaluation: EvaluationSection,
    pub classifiers: Option<Vec<ClassifierEntry>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            output: None,
            seed: None,
            reference_year: DEFAULT_REFERENCE_YEAR,
            k_clusters: 3,
            impute: ImputePolicy::Fail,
            formats: vec![ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Svg],
            paper_faithful_selection: false,
            parallel: true,
            gower: GowerSection::default(),
            evaluation: EvaluationSection::default(),
            classifiers: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub ratio: Option<f64>,
    pub folds: Option<usize>,
    pub k: Option<usize>,
    pub reference_year: Option<i32>,
    pub impute: Option<ImputePolicy>,
    pub paper_faithful_selection: bool,
    pub sequential: bool,
}

/// Configuration after overrides, with paths resolved and values checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub seed: u64,
    pub reference_year: i32,
    pub k_clusters: usize,
    pub impute: ImputePolicy,
    pub formats: Vec<ReportFormat>,
    pub categorical_match: bool,
    pub experiment: ExperimentConfig,
}

fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn classifier_spec(e: &ClassifierEntry, default_seed: u64) -> CmdResult<ClassifierSpec> {
    let kind: ClassifierKind = e
        .kind
        .parse()
        .map_err(|err| config(format!("classifier {:?}: {err}", e.name)))?;
    let mut params = serde_json::to_value(kind.default_params()).map_err(|err| config(err))?;
    if let Some(t) = &e.params {
        if t.contains_key("kind") {
            return Err(config(format!("classifier {:?}: set kind outside params", e.name)));
        }
        let patch = serde_json::to_value(t).map_err(|err| config(err))?;
        merge(&mut params, patch);
    }
    let params: ModelParams = serde_json::from_value(params)
        .map_err(|err| config(format!("classifier {:?}: {err}", e.name)))?;
    Ok(ClassifierSpec::named(&e.name, params, e.seed.unwrap_or(default_seed)))
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CmdResult<Self> {
        toml::from_str(text).map_err(|e| config(format!("invalid config: {e}")))
    }

    /// `base_dir` anchors relative paths from the file; override paths are
    /// taken as given.
    pub fn resolve(&self, base_dir: &Path, o: &Overrides) -> CmdResult<ResolvedConfig> {
        let anchor = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base_dir.join(p) };
        let input = o
            .input
            .clone()
            .or_else(|| self.input.as_ref().map(anchor))
            .ok_or_else(|| config("no input path (set `input` or pass --input)"))?;
        let output = o
            .output
            .clone()
            .or_else(|| self.output.as_ref().map(anchor))
            .ok_or_else(|| config("no output directory (set `output` or pass --out)"))?;
        if input.as_os_str().is_empty() || output.as_os_str().is_empty() {
            return Err(config("paths must be nonempty"));
        }
        let seed = o
            .seed
            .or(self.seed)
            .ok_or_else(|| config("no seed (set `seed` or pass --seed)"))?;
        let k_clusters = o.k.unwrap_or(self.k_clusters);
        if k_clusters < 2 {
            return Err(config(format!("k_clusters must be >= 2, got {k_clusters}")));
        }
        let ratio = o.ratio.unwrap_or(self.evaluation.psm_ratio);
        let folds = o.folds.unwrap_or(self.evaluation.folds);
        let feature_sets = self
            .evaluation
            .feature_sets
            .iter()
            .map(|s| s.parse::<FeatureSet>().map_err(|e| config(e)))
            .collect::<CmdResult<Vec<_>>>()?;
        let classifiers = match &self.classifiers {
            None => default_roster(seed),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, e)| classifier_spec(e, derive_seed(seed, i as u64)))
                .collect::<CmdResult<Vec<_>>>()?,
        };
        if classifiers.is_empty() {
            return Err(config("classifier roster is empty"));
        }
        let mut rf_selection = jcat_core::classify::ForestParams::random_forest();
        rf_selection.n_trees = self.evaluation.rf_selection_trees;
        let experiment = ExperimentConfig {
            regimes: vec![Regime::Psm { ratio }, Regime::Cvm { folds }],
            classifiers,
            feature_sets,
            seed,
            selection: if o.paper_faithful_selection || self.paper_faithful_selection {
                SelectionMode::Global
            } else {
                SelectionMode::PerFold
            },
            rf_selection,
            stall_limit: self.evaluation.stall_limit,
            parallel: self.parallel && !o.sequential,
        };
        experiment.validate().map_err(|e| config(e))?;
        if self.formats.is_empty() {
            return Err(config("formats must list at least one of csv, markdown, svg"));
        }
        Ok(ResolvedConfig {
            input,
            output,
            seed,
            reference_year: o.reference_year.unwrap_or(self.reference_year),
            k_clusters,
            impute: o.impute.unwrap_or(self.impute),
            formats: self.formats.clone(),
            categorical_match: self.gower.categorical_match,
            experiment,
        })
    }
}

impl ResolvedConfig {
    /// Stable JSON of everything that determines the run's outputs.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_the_full_grid() {
        let c = PipelineConfig::from_toml("input = \"a.csv\"\noutput = \"o\"\nseed = 7\n").unwrap();
        let r = c.resolve(Path::new("/base"), &Overrides::default()).unwrap();
        assert_eq!(r.input, PathBuf::from("/base/a.csv"));
        assert_eq!(r.experiment.classifiers.len(), 9);
        assert_eq!(r.experiment.feature_sets.len(), 11);
        assert_eq!(r.experiment.regimes.len(), 2);
        assert_eq!(r.experiment.selection, SelectionMode::PerFold);
    }

    #[test]
    fn overrides_win() {
        let c = PipelineConfig::from_toml("input = \"a.csv\"\noutput = \"o\"\nseed = 7\n").unwrap();
        let o = Overrides {
            seed: Some(9),
            ratio: Some(0.7),
            folds: Some(5),
            k: Some(4),
            paper_faithful_selection: true,
            output: Some(PathBuf::from("elsewhere")),
            ..Overrides::default()
        };
        let r = c.resolve(Path::new("/base"), &o).unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.k_clusters, 4);
        assert_eq!(r.output, PathBuf::from("elsewhere"));
        assert_eq!(r.experiment.regimes, vec![Regime::Psm { ratio: 0.7 }, Regime::Cvm { folds: 5 }]);
        assert_eq!(r.experiment.selection, SelectionMode::Global);
    }

    #[test]
    fn classifier_params_merge_onto_defaults() {
        let text = r#"
input = "a.csv"
output = "o"
seed = 1
[[classifiers]]
name = "small-rf"
kind = "rf"
params = { n_trees = 7, tree = { max_depth = 4 } }
"#;
        let r = PipelineConfig::from_toml(text)
            .unwrap()
            .resolve(Path::new("."), &Overrides::default())
            .unwrap();
        match &r.experiment.classifiers[0].params {
            ModelParams::Rf(p) => {
                assert_eq!(p.n_trees, 7);
                assert_eq!(p.tree.max_depth, Some(4));
                assert!(p.bootstrap);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_errors() {
        assert!(PipelineConfig::from_toml("bogus = 1").is_err());
        let base = "input = \"a.csv\"\noutput = \"o\"\n";
        let c = PipelineConfig::from_toml(base).unwrap();
        assert!(c.resolve(Path::new("."), &Overrides::default()).is_err(), "seed is required");
        let c = PipelineConfig::from_toml(&format!("{base}seed = 1\nk_clusters = 1\n")).unwrap();
        assert!(c.resolve(Path::new("."), &Overrides::default()).is_err());
        let c = PipelineConfig::from_toml(&format!("{base}seed = 1\n[evaluation]\nfeature_sets = [\"mi-3\"]\n")).unwrap();
        assert!(c.resolve(Path::new("."), &Overrides::default()).is_err());
        let c = PipelineConfig::from_toml(&format!(
            "{base}seed = 1\n[[classifiers]]\nname = \"x\"\nkind = \"svm\"\n"
        ))
        .unwrap();
        assert!(c.resolve(Path::new("."), &Overrides::default()).is_err());
        let c = PipelineConfig::from_toml(&format!(
            "{base}seed = 1\n[[classifiers]]\nname = \"x\"\nkind = \"gbm\"\nparams = {{ learning_rate = 0.0 }}\n"
        ))
        .unwrap();
        assert!(c.resolve(Path::new("."), &Overrides::default()).is_err());
    }
}
