//! `pipeline`: ingest, preprocess, cluster, label, select, train, evaluate, report.

use std::fs::File;
use std::io::BufReader;

use jcat_core::classify::{
    train_with, ClassifierKind, ClassifierSpec, ForestParams, ModelParams, TrainOptions,
    KnnParams,
};
use jcat_core::cluster::{
    adjusted_rand_index, assign_categories, gower_matrix, k_means, k_medoids, rank_clusters,
    silhouette_width, Category, GowerOptions, KMedoidsParams, PamInit, DEFAULT_QUALITY_FEATURES,
};
use jcat_core::evaluate::{
    run_experiment, EvalReport, ExperimentConfig, FeatureSet, Regime, SelectionMode,
};
use jcat_core::featsel::{
    best_first_cfs, chi2_scores, rank, rf_importance, write_scores_csv, write_subset_csv,
};
use jcat_core::ingest::{load_table, validate_schema};
use jcat_core::preprocess::Preprocessor;
use jcat_core::report::{render_charts, render_comparison_markdown, render_markdown, ComparisonRow};
use jcat_core::rng::derive_seed;
use log::{info, warn};
use serde_json::json;

use crate::config::{ReportFormat, ResolvedConfig};
use crate::failure::{internal, CmdResult, DataContext, Failure};
use crate::output::{sha256_hex, ArtifactWriter};

pub const MANIFEST_FORMAT: &str = "jcat-manifest";

/// Names of the ordinal labels: categories for three clusters, tiers otherwise.
pub fn label_names(k: usize) -> Vec<String> {
    if k == 3 {
        Category::ALL.iter().map(|c| c.name().to_string()).collect()
    } else {
        (0..k).map(|r| format!("tier-{r}")).collect()
    }
}

pub fn slug(name: &str) -> String {
    let mut s = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            s.push(ch.to_ascii_lowercase());
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    s.trim_matches('-').to_string()
}

fn json_bytes(v: &serde_json::Value) -> anyhow::Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn labels_csv(names: &[String], labels: &[usize]) -> Vec<u8> {
    let mut s = String::from("row_index,category\n");
    for (i, &l) in labels.iter().enumerate() {
        s.push_str(&format!("{i},{}\n", names[l]));
    }
    s.into_bytes()
}

pub fn run(cfg: &ResolvedConfig, config_text: &str) -> CmdResult<()> {
    let input_bytes = std::fs::read(&cfg.input).map_err(|e| {
        Failure::Data(anyhow::anyhow!("cannot read input {}: {e}", cfg.input.display()))
    })?;
    let mut out = ArtifactWriter::new(&cfg.output);
    let mut warnings: Vec<String> = Vec::new();

    info!("ingest: {}", cfg.input.display());
    let table = load_table(&input_bytes[..]).data(&format!("ingest {}", cfg.input.display()))?;
    let schema = validate_schema(&table);
    out.write_with("data/validation.json", |b| {
        let per: Vec<_> = schema
            .missing_per_column
            .iter()
            .map(|(c, n)| json!({"column": c.display_name(), "missing": n}))
            .collect();
        b.extend(json_bytes(&json!({
            "rows": table.n_rows(),
            "rows_with_missing": schema.rows_with_missing,
            "total_missing": schema.total_missing,
            "missing_per_column": per,
        }))?);
        Ok(())
    })?;

    info!("preprocess: {} rows", table.n_rows());
    let pre = Preprocessor::fit(&table, cfg.reference_year, cfg.impute).data("preprocess")?;
    warnings.extend(pre.warnings.iter().cloned());
    out.write_with("data/cleaned.csv", |b| Ok(pre.cleaned.write_csv(b)?))?;
    out.write_with("data/encoded.csv", |b| Ok(pre.encoded.write_csv(b)?))?;
    out.write_with("data/scaled.csv", |b| Ok(pre.scaled.write_csv(b)?))?;
    out.write_with("preprocess/encoding.jsonl", |b| Ok(pre.fitted.encoding.write_sidecar(b)?))?;
    out.write_with("preprocess/scale.jsonl", |b| Ok(pre.fitted.scale.write_sidecar(b)?))?;
    out.write_with("preprocess/impute.json", |b| {
        b.extend(json_bytes(&serde_json::to_value(&pre.fitted.impute)?)?);
        Ok(())
    })?;
    let names = label_names(cfg.k_clusters);
    out.write_with("preprocess/labels.json", |b| {
        b.extend(json_bytes(&json!(names))?);
        Ok(())
    })?;

    info!("cluster: gower + k-medoids, k = {}", cfg.k_clusters);
    let x = &pre.scaled;
    let gower = GowerOptions {
        categorical_match: cfg.categorical_match,
        weights: None,
        parallel: cfg.experiment.parallel,
    };
    let d = gower_matrix(x, &gower).data("cluster")?;
    let (mean_d, max_d) = d.summary();
    out.write_with("cluster/distance_summary.json", |b| {
        b.extend(json_bytes(&json!({"n": d.len(), "mean": mean_d, "max": max_d}))?);
        Ok(())
    })?;
    let params = KMedoidsParams {
        seed: cfg.seed,
        ..KMedoidsParams::new(cfg.k_clusters)
    };
    let pam = k_medoids(&d, &params).data("cluster")?;
    let medoids = pam.medoids().map(<[usize]>::to_vec).unwrap_or_default();
    let random_run = |s: u64| {
        k_medoids(
            &d,
            &KMedoidsParams {
                seed: s,
                init: PamInit::Random,
                ..KMedoidsParams::new(cfg.k_clusters)
            },
        )
    };
    let ra = random_run(derive_seed(cfg.seed, 1)).data("cluster")?;
    let rb = random_run(derive_seed(cfg.seed, 2)).data("cluster")?;
    let ari_stability = adjusted_rand_index(&ra.labels, &rb.labels).data("cluster")?;
    let ari_build = adjusted_rand_index(&pam.labels, &ra.labels).data("cluster")?;
    let silhouette = silhouette_width(&d, &pam.labels).data("cluster")?;

    let (cluster_rank, composite) =
        rank_clusters(x, &pam.labels, &DEFAULT_QUALITY_FEATURES).data("label")?;
    if cfg.k_clusters == 3 {
        // Same ordering as `rank`, via the category API.
        let map = assign_categories(x, &pam.labels, &DEFAULT_QUALITY_FEATURES).data("label")?;
        if map.categories.iter().map(|c| c.code()).collect::<Vec<_>>() != cluster_rank {
            return Err(internal("category map disagrees with cluster ranking"));
        }
    }
    let y: Vec<usize> = pam.labels.iter().map(|&l| cluster_rank[l]).collect();
    out.write_with("cluster/assignment.csv", |b| {
        let mut s = String::from("row_index,cluster_id,category\n");
        for (i, &l) in pam.labels.iter().enumerate() {
            s.push_str(&format!("{i},{l},{}\n", names[cluster_rank[l]]));
        }
        b.extend(s.into_bytes());
        Ok(())
    })?;
    out.write_with("cluster/category_map.csv", |b| {
        let mut s = String::from("cluster_id,category,composite,medoid_row,size\n");
        for c in 0..cfg.k_clusters {
            let size = pam.labels.iter().filter(|&&l| l == c).count();
            s.push_str(&format!(
                "{c},{},{},{},{size}\n",
                names[cluster_rank[c]],
                composite[c],
                medoids.get(c).map(|m| m.to_string()).unwrap_or_default()
            ));
        }
        b.extend(s.into_bytes());
        Ok(())
    })?;
    out.write_with("cluster/validation.json", |b| {
        b.extend(json_bytes(&json!({
            "k": cfg.k_clusters,
            "total_cost": pam.total_cost,
            "swap_iterations": pam.iterations,
            "medoids": medoids,
            "silhouette_width": silhouette,
            "ari_random_init_stability": ari_stability,
            "ari_build_vs_random_init": ari_build,
        }))?);
        Ok(())
    })?;
    info!("cluster: silhouette {silhouette:.4}, stability ARI {ari_stability:.4}");

    info!("feature selection on all rows (descriptive)");
    let chi2 = chi2_scores(x, &y).data("featsel")?;
    let rf = rf_importance(x, &y, &cfg.experiment.rf_selection, derive_seed(cfg.seed, 3))
        .data("featsel")?;
    let cfs = best_first_cfs(x, &y, cfg.experiment.stall_limit).data("featsel")?;
    out.write_with("features/chi2_scores.csv", |b| Ok(write_scores_csv(b, &rank(&chi2))?))?;
    out.write_with("features/rf_importance.csv", |b| Ok(write_scores_csv(b, &rank(&rf))?))?;
    out.write_with("features/cfs_subset.csv", |b| Ok(write_subset_csv(b, &cfs, &chi2)?))?;
    out.write_with("features/cfs_subset.json", |b| {
        b.extend(json_bytes(&serde_json::to_value(&cfs)?)?);
        Ok(())
    })?;

    info!(
        "evaluate: {} classifiers x {} feature sets x {} regimes",
        cfg.experiment.classifiers.len(),
        cfg.experiment.feature_sets.len(),
        cfg.experiment.regimes.len()
    );
    let exp = run_experiment(&cfg.experiment, &pre.dense, &y).data("evaluate")?;
    warnings.extend(exp.warnings.iter().cloned());
    let expected_rows = cfg.experiment.classifiers.len()
        * cfg.experiment.feature_sets.len()
        * cfg.experiment.regimes.len();
    if exp.report.len() != expected_rows {
        return Err(internal(format!(
            "report has {} rows, grid has {expected_rows}",
            exp.report.len()
        )));
    }
    for c in exp.confusion.iter().filter(|c| c.regime == "CVM") {
        if c.matrix.total() as usize != y.len() {
            return Err(internal(format!(
                "pooled CV matrix for {} / {} covers {} of {} rows",
                c.classifier,
                c.feature_set,
                c.matrix.total(),
                y.len()
            )));
        }
    }
    write_report(&mut out, "report/", &exp.report, &cfg.formats)?;
    out.write_with("features/fold_selections.csv", |b| {
        let mut w = String::from("regime,fold,feature_set,features\n");
        for s in &exp.selections {
            w.push_str(&format!("{},{},{},{}\n", s.regime, s.fold, s.feature_set, s.features.join(";")));
        }
        b.extend(w.into_bytes());
        Ok(())
    })?;
    out.write_with("report/confusion.json", |b| {
        let v: Vec<_> = exp
            .confusion
            .iter()
            .map(|c| {
                json!({
                    "classifier": c.classifier,
                    "feature_set": c.feature_set,
                    "regime": c.regime,
                    "counts": c.matrix.counts,
                })
            })
            .collect();
        b.extend(json_bytes(&json!({"class_order": names, "cells": v}))?);
        Ok(())
    })?;

    info!("comparison: k-means + KNN");
    let comparison = comparison_rows(cfg, x, &pre.dense, &pam.labels, &exp.report)?;
    out.write("report/comparison.md", render_comparison_markdown(&comparison).as_bytes())?;

    info!("train final models on all rows");
    let opts = TrainOptions {
        parallel: cfg.experiment.parallel,
    };
    for spec in &cfg.experiment.classifiers {
        let model = train_with(spec, x, &y, opts).data(&format!("train {}", spec.name))?;
        let pred = model.predict(&x.values).data("predict")?;
        let s = slug(&spec.name);
        let json = model.to_json().data("serialize model")?;
        out.write(&format!("models/{s}.json"), json.as_bytes())?;
        out.write(&format!("models/{s}.predictions.csv"), &labels_csv(&names, &pred))?;
    }

    let mut wtxt = warnings.join("\n");
    if !wtxt.is_empty() {
        wtxt.push('\n');
    }
    for w in &warnings {
        warn!("{w}");
    }
    out.write("warnings.txt", wtxt.as_bytes())?;

    let artifacts: Vec<_> = out
        .artifacts()
        .into_iter()
        .map(|(p, h)| json!({"path": p, "sha256": h}))
        .collect();
    let config_json: serde_json::Value =
        serde_json::from_str(&cfg.canonical_json()).map_err(|e| internal(e))?;
    let manifest = json!({
        "format": MANIFEST_FORMAT,
        "version": 1,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "core_version": jcat_core::VERSION,
        "seed": cfg.seed,
        "config_sha256": sha256_hex(cfg.canonical_json().as_bytes()),
        "config_file_sha256": sha256_hex(config_text.as_bytes()),
        "input_sha256": sha256_hex(&input_bytes),
        "effective_config": config_json,
        "artifacts": artifacts,
    });
    out.write_with("manifest.json", |b| {
        b.extend(json_bytes(&manifest)?);
        Ok(())
    })?;
    info!("done: {}", cfg.output.display());
    Ok(())
}

pub fn write_report(
    out: &mut ArtifactWriter,
    prefix: &str,
    report: &EvalReport,
    formats: &[ReportFormat],
) -> CmdResult<()> {
    if formats.contains(&ReportFormat::Csv) {
        out.write_with(&format!("{prefix}report.csv"), |b| Ok(report.write_csv(b)?))?;
    }
    if formats.contains(&ReportFormat::Markdown) {
        out.write(&format!("{prefix}report.md"), render_markdown(report).as_bytes())?;
    }
    if formats.contains(&ReportFormat::Svg) {
        for chart in render_charts(report) {
            out.write(&format!("{prefix}charts/{}.svg", chart.stem), chart.svg.as_bytes())?;
        }
    }
    Ok(())
}

fn comparison_rows(
    cfg: &ResolvedConfig,
    scaled: &jcat_core::FeatureMatrix,
    dense: &jcat_core::FeatureMatrix,
    pam_labels: &[usize],
    report: &EvalReport,
) -> CmdResult<Vec<ComparisonRow>> {
    let km = k_means(&scaled.values, cfg.k_clusters, derive_seed(cfg.seed, 4), 300).data("k-means")?;
    let (rank, _) = rank_clusters(scaled, &km.labels, &DEFAULT_QUALITY_FEATURES).data("k-means")?;
    let y_km: Vec<usize> = km.labels.iter().map(|&l| rank[l]).collect();
    let ratio = cfg
        .experiment
        .regimes
        .iter()
        .find_map(|r| match r {
            Regime::Psm { ratio } => Some(*ratio),
            _ => None,
        })
        .unwrap_or(0.8);
    let knn = ExperimentConfig {
        regimes: vec![Regime::Psm { ratio }],
        classifiers: vec![ClassifierSpec::named(
            "KNN",
            ModelParams::Knn(KnnParams::default()),
            derive_seed(cfg.seed, 5),
        )],
        feature_sets: vec![FeatureSet::All],
        seed: cfg.seed,
        selection: SelectionMode::PerFold,
        rf_selection: ForestParams::random_forest(),
        stall_limit: cfg.experiment.stall_limit,
        parallel: cfg.experiment.parallel,
    };
    let r = run_experiment(&knn, dense, &y_km).data("k-means comparison")?;
    let row = &r.report.rows[0];
    let agreement = adjusted_rand_index(&km.labels, pam_labels).data("k-means comparison")?;
    let mut rows = vec![ComparisonRow {
        approach: format!("K-means + KNN, this run (ARI vs k-medoids {agreement:.3})"),
        clustering: "K-Means".into(),
        classifier: ClassifierKind::Knn.as_str().to_uppercase(),
        feature_selection: "all".into(),
        regime: row.regime.clone(),
        accuracy: row.accuracy,
        precision: row.precision,
        recall: row.recall,
    }];
    let best = report
        .rows
        .iter()
        .filter(|r| r.regime == "CVM")
        .rev()
        .max_by(|a, b| a.accuracy.total_cmp(&b.accuracy));
    if let Some(b) = best {
        rows.insert(
            0,
            ComparisonRow {
                approach: "Gower k-medoids + best grid cell, this run".into(),
                clustering: "K-Medoids".into(),
                classifier: b.classifier.clone(),
                feature_selection: b.feature_set.clone(),
                regime: b.regime.clone(),
                accuracy: b.accuracy,
                precision: b.precision,
                recall: b.recall,
            },
        );
    }
    Ok(rows)
}

/// Used by `predict` to reopen a JSON sidecar.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> CmdResult<T> {
    let f = File::open(path).map_err(|e| {
        Failure::Data(anyhow::anyhow!("cannot open {}: {e}", path.display()))
    })?;
    serde_json::from_reader(BufReader::new(f))
        .map_err(|e| Failure::Data(anyhow::anyhow!("cannot parse {}: {e}", path.display())))
}
