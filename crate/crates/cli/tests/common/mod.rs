#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn jcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcat"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("jcat runs")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn synth(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let out = dir.join("journals.csv");
    let o = jcat(&["synth", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

pub const SMALL_CONFIG: &str = r#"
seed = 11
formats = ["csv", "markdown", "svg"]

[evaluation]
folds = 3
feature_sets = ["cfs", "chi2-5", "rf-5"]
rf_selection_trees = 10

[[classifiers]]
name = "NB"
kind = "nb"

[[classifiers]]
name = "RF"
kind = "rf"
params = { n_trees = 10 }
"#;

/// Writes the small config next to `input` and runs the pipeline into `out`.
pub fn run_small(dir: &Path, input: &Path, out: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("small.toml");
    std::fs::write(&cfg, SMALL_CONFIG).unwrap();
    let mut args = vec!["pipeline", "--config", p(&cfg), "--input", p(input), "--out", p(out)];
    args.extend_from_slice(extra);
    jcat(&args)
}
