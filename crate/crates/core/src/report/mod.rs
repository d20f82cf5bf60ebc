//! Markdown tables and SVG bar charts for an [`EvalReport`].
//!
//! Tables mirror the published layout: one PR/RE/ACC table per regime for
//! subset-style feature sets (CFS, all), and one classifier x k table per
//! regime, ranking method and metric for ranked feature sets. Each table
//! carries a footnote with the published reference values for the same
//! cells where they exist; those are reference targets only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::evaluate::{classifier_rank, EvalReport, FeatureSet, ReportRow};

const REFERENCE_CSV: &str = include_str!("reference.csv");

/// Published reference grid, keyed like a report.
pub fn reference_values() -> EvalReport {
    EvalReport::read_csv(REFERENCE_CSV.as_bytes()).expect("embedded reference grid parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Precision,
    Recall,
    Accuracy,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::Precision, Metric::Recall];

    pub fn of(self, r: &ReportRow) -> f64 {
        match self {
            Metric::Precision => r.precision,
            Metric::Recall => r.recall,
            Metric::Accuracy => r.accuracy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Accuracy => "accuracy",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Metric::Precision => "Precision",
            Metric::Recall => "Recall",
            Metric::Accuracy => "Accuracy",
        }
    }
}

fn regime_title(r: &str) -> String {
    match r {
        "CVM" => "10-fold cross-validation (CVM)".to_string(),
        "PSM" => "percentage split (PSM)".to_string(),
        other => other.to_string(),
    }
}

/// Grouping of report rows into one table / chart.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Block {
    /// A single feature set: PR/RE/ACC columns.
    Subset(String),
    /// A ranking method (`chi2` or `rf`): k columns, one table per metric.
    Ranked(String),
}

fn block_of(fs: &str) -> (Block, Option<usize>) {
    match fs.parse::<FeatureSet>() {
        Ok(FeatureSet::Chi2(k)) => (Block::Ranked("chi2".into()), Some(k)),
        Ok(FeatureSet::Rf(k)) => (Block::Ranked("rf".into()), Some(k)),
        _ => (Block::Subset(fs.to_string()), None),
    }
}

fn block_rank(b: &Block) -> (usize, String) {
    match b {
        Block::Subset(s) if s == "cfs" => (0, s.clone()),
        Block::Subset(s) if s == "all" => (1, s.clone()),
        Block::Subset(s) => (2, s.clone()),
        Block::Ranked(m) if m == "chi2" => (3, m.clone()),
        Block::Ranked(m) => (4, m.clone()),
    }
}

fn subset_title(fs: &str) -> String {
    match fs {
        "cfs" => "CFS-selected features".to_string(),
        "all" => "all features".to_string(),
        other => format!("feature set {other}"),
    }
}

fn method_title(m: &str) -> &str {
    match m {
        "chi2" => "Chi2-ranked features",
        "rf" => "RF-ranked features",
        other => other,
    }
}

struct Grouped<'a> {
    /// regime -> block -> rows, all in canonical order.
    blocks: Vec<(String, Vec<(Block, Vec<&'a ReportRow>)>)>,
}

fn group(report: &EvalReport) -> Grouped<'_> {
    let mut regimes: Vec<String> = Vec::new();
    let mut map: BTreeMap<(usize, (usize, String)), (Block, Vec<&ReportRow>)> = BTreeMap::new();
    for r in &report.rows {
        let ri = match regimes.iter().position(|x| *x == r.regime) {
            Some(i) => i,
            None => {
                regimes.push(r.regime.clone());
                regimes.len() - 1
            }
        };
        let (b, _) = block_of(&r.feature_set);
        map.entry((ri, block_rank(&b)))
            .or_insert_with(|| (b, Vec::new()))
            .1
            .push(r);
    }
    let mut blocks: Vec<(String, Vec<(Block, Vec<&ReportRow>)>)> =
        regimes.iter().map(|r| (r.clone(), Vec::new())).collect();
    for ((ri, _), v) in map {
        blocks[ri].1.push(v);
    }
    Grouped { blocks }
}

fn classifiers_in(rows: &[&ReportRow]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in rows {
        if !names.contains(&r.classifier) {
            names.push(r.classifier.clone());
        }
    }
    names.sort_by(|a, b| classifier_rank(a).cmp(&classifier_rank(b)).then(a.cmp(b)));
    names
}

fn ks_in(rows: &[&ReportRow]) -> Vec<usize> {
    let mut ks: Vec<usize> = rows.iter().filter_map(|r| block_of(&r.feature_set).1).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// Markdown rendering of a report, with reference footnotes.
pub fn render_markdown(report: &EvalReport) -> String {
    let reference = reference_values();
    let mut out = String::new();
    let mut notes: Vec<String> = Vec::new();
    let mut table_no = 0;
    out.push_str("# Evaluation results\n");
    for (regime, blocks) in &group(report).blocks {
        for (block, rows) in blocks {
            let clfs = classifiers_in(rows);
            match block {
                Block::Subset(fs) => {
                    table_no += 1;
                    let ref_cells: Vec<String> = clfs
                        .iter()
                        .filter_map(|c| reference.get(c, fs, regime))
                        .map(|r| {
                            format!(
                                "{} {}/{}/{}",
                                r.classifier,
                                fmt3(r.precision),
                                fmt3(r.recall),
                                fmt3(r.accuracy)
                            )
                        })
                        .collect();
                    let marker = if ref_cells.is_empty() {
                        String::new()
                    } else {
                        notes.push(format!(
                            "[^ref{table_no}]: Published reference PR/RE/ACC: {}.",
                            ref_cells.join("; ")
                        ));
                        format!("[^ref{table_no}]")
                    };
                    let _ = writeln!(
                        out,
                        "\n## Table {table_no}: {} using {}{marker}\n",
                        subset_title(fs),
                        regime_title(regime)
                    );
                    out.push_str("| Classifier | PR | RE | ACC |\n|---|---|---|---|\n");
                    for c in &clfs {
                        if let Some(r) = rows.iter().find(|r| &r.classifier == c) {
                            let _ = writeln!(
                                out,
                                "| {} | {} | {} | {} |",
                                c,
                                fmt3(r.precision),
                                fmt3(r.recall),
                                fmt3(r.accuracy)
                            );
                        }
                    }
                }
                Block::Ranked(method) => {
                    let ks = ks_in(rows);
                    for metric in Metric::ALL {
                        table_no += 1;
                        let mut ref_cells = Vec::new();
                        for c in &clfs {
                            let vals: Vec<String> = ks
                                .iter()
                                .filter_map(|k| {
                                    reference
                                        .get(c, &format!("{method}-{k}"), regime)
                                        .map(|r| format!("{k}: {}", fmt3(metric.of(r))))
                                })
                                .collect();
                            if !vals.is_empty() {
                                ref_cells.push(format!("{c} ({})", vals.join(", ")));
                            }
                        }
                        let marker = if ref_cells.is_empty() {
                            String::new()
                        } else {
                            notes.push(format!(
                                "[^ref{table_no}]: Published reference {}: {}.",
                                metric.name(),
                                ref_cells.join("; ")
                            ));
                            format!("[^ref{table_no}]")
                        };
                        let _ = writeln!(
                            out,
                            "\n## Table {table_no}: {} values with {} using {}{marker}\n",
                            metric.title(),
                            method_title(method),
                            regime_title(regime)
                        );
                        out.push_str("| Classifier |");
                        for k in &ks {
                            let _ = write!(out, " {k} Features |");
                        }
                        out.push_str("\n|---|");
                        out.push_str(&"---|".repeat(ks.len()));
                        out.push('\n');
                        for c in &clfs {
                            let _ = write!(out, "| {c} |");
                            for k in &ks {
                                let fs = format!("{method}-{k}");
                                let cell = rows
                                    .iter()
                                    .find(|r| &r.classifier == c && r.feature_set == fs)
                                    .map(|r| fmt3(metric.of(r)))
                                    .unwrap_or_else(|| "-".to_string());
                                let _ = write!(out, " {cell} |");
                            }
                            out.push('\n');
                        }
                    }
                }
            }
        }
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            out.push_str(&n);
            out.push('\n');
        }
    }
    out
}

/// One rendered chart and a file-name stem for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgChart {
    pub stem: String,
    pub svg: String,
}

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Grouped bar chart: one group per category, one bar per series, values in [0, 1].
pub fn bar_chart(title: &str, categories: &[String], series: &[(String, Vec<f64>)]) -> String {
    let bar_w = 14.0;
    let gap = 18.0;
    let group_w = bar_w * series.len().max(1) as f64 + gap;
    let left = 50.0;
    let top = 40.0;
    let plot_h = 240.0;
    let plot_w = group_w * categories.len().max(1) as f64;
    let legend_w = 150.0;
    let width = left + plot_w + 20.0 + legend_w;
    let height = top + plot_h + 90.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            left + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    for (g, cat) in categories.iter().enumerate() {
        let gx = left + g as f64 * group_w + gap / 2.0;
        let _ = writeln!(s, r#"<g class="bar-group" data-category="{}">"#, escape(cat));
        for (si, (name, vals)) in series.iter().enumerate() {
            let v = vals.get(g).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            let h = plot_h * v;
            let _ = writeln!(
                s,
                r#"<rect class="bar" x="{:.1}" y="{:.1}" width="{bar_w:.1}" height="{h:.1}" fill="{}"><title>{} {}: {v:.3}</title></rect>"#,
                gx + si as f64 * bar_w,
                top + plot_h - h,
                PALETTE[si % PALETTE.len()],
                escape(cat),
                escape(name)
            );
        }
        let cx = gx + bar_w * series.len() as f64 / 2.0;
        let ly = top + plot_h + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{ly:.1}" text-anchor="end" transform="rotate(-35 {cx:.1} {ly:.1})">{}</text>"#,
            escape(cat)
        );
        s.push_str("</g>\n");
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    for (si, (name, _)) in series.iter().enumerate() {
        let lx = left + plot_w + 20.0;
        let ly = top + 16.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{ly:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            PALETTE[si % PALETTE.len()],
            lx + 14.0,
            ly + 9.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Charts: one per subset-style feature set (PR/RE/ACC series), and one per
/// ranking method and metric (k series), for each regime.
pub fn render_charts(report: &EvalReport) -> Vec<SvgChart> {
    let mut charts = Vec::new();
    for (regime, blocks) in &group(report).blocks {
        let rlow = regime.to_ascii_lowercase();
        for (block, rows) in blocks {
            let clfs = classifiers_in(rows);
            match block {
                Block::Subset(fs) => {
                    let series = [Metric::Precision, Metric::Recall, Metric::Accuracy]
                        .iter()
                        .map(|m| {
                            let vals = clfs
                                .iter()
                                .map(|c| {
                                    rows.iter()
                                        .find(|r| &r.classifier == c)
                                        .map(|r| m.of(r))
                                        .unwrap_or(0.0)
                                })
                                .collect();
                            (m.title().to_string(), vals)
                        })
                        .collect::<Vec<_>>();
                    charts.push(SvgChart {
                        stem: format!("{rlow}_{}", fs.replace(|c: char| !c.is_ascii_alphanumeric(), "_")),
                        svg: bar_chart(
                            &format!("Evaluation results with {} using {}", subset_title(fs), regime_title(regime)),
                            &clfs,
                            &series,
                        ),
                    });
                }
                Block::Ranked(method) => {
                    let ks = ks_in(rows);
                    for metric in Metric::ALL {
                        let series = ks
                            .iter()
                            .map(|k| {
                                let fs = format!("{method}-{k}");
                                let vals = clfs
                                    .iter()
                                    .map(|c| {
                                        rows.iter()
                                            .find(|r| &r.classifier == c && r.feature_set == fs)
                                            .map(|r| metric.of(r))
                                            .unwrap_or(0.0)
                                    })
                                    .collect();
                                (format!("{k} features"), vals)
                            })
                            .collect::<Vec<_>>();
                        charts.push(SvgChart {
                            stem: format!("{rlow}_{method}_{}", metric.name()),
                            svg: bar_chart(
                                &format!(
                                    "{} comparison with {} using {}",
                                    metric.title(),
                                    method_title(method),
                                    regime_title(regime)
                                ),
                                &clfs,
                                &series,
                            ),
                        });
                    }
                }
            }
        }
    }
    charts
}

/// A row of the approach comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub approach: String,
    pub clustering: String,
    pub classifier: String,
    pub feature_selection: String,
    pub regime: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Published reference rows for the k-means + KNN comparison.
pub fn comparison_reference() -> Vec<ComparisonRow> {
    vec![ComparisonRow {
        approach: "K-means + KNN on the original data (published reference)".into(),
        clustering: "K-Means".into(),
        classifier: "KNN".into(),
        feature_selection: "MI".into(),
        regime: "PSM".into(),
        accuracy: 0.985,
        precision: 0.983,
        recall: 0.952,
    }]
}

pub fn render_comparison_markdown(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("# Approach comparison\n\n");
    out.push_str("| Approach | Clustering | Classifier | Feature selection | Training | ACC | PR | RE |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows.iter().chain(comparison_reference().iter()) {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.approach,
            r.clustering,
            r.classifier,
            r.feature_selection,
            r.regime,
            fmt3(r.accuracy),
            fmt3(r.precision),
            fmt3(r.recall)
        );
    }
    out
}
