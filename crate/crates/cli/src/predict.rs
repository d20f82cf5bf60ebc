//! `predict`: apply saved preprocessing sidecars and a saved model to new rows.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use jcat_core::ingest::{load_table_with, Column, IngestError};
use jcat_core::preprocess::{
    EncodingMap, ImputeParams, Preprocessor, ScaleParams, UnseenCategory, IDENTIFIER_COLUMNS,
};
use jcat_core::TrainedModel;
use log::info;

use crate::failure::{CmdResult, DataContext, Failure};
use crate::pipeline::read_json;

pub struct PredictArgs {
    pub model: PathBuf,
    pub sidecars: Option<PathBuf>,
    pub input: PathBuf,
    pub unseen_as_new_code: bool,
}

fn open(path: &Path) -> CmdResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Data(anyhow::anyhow!("cannot open {}: {e}", path.display())))
}

pub fn load_preprocessor(dir: &Path) -> CmdResult<Preprocessor> {
    let encoding = EncodingMap::read_sidecar(open(&dir.join("encoding.jsonl"))?)
        .data("reading encoding sidecar")?;
    let scale =
        ScaleParams::read_sidecar(open(&dir.join("scale.jsonl"))?).data("reading scale sidecar")?;
    let impute: ImputeParams = read_json(&dir.join("impute.json"))?;
    Ok(Preprocessor {
        encoding,
        impute,
        scale,
    })
}

/// Predicted label names for every input row; empty when the input has no rows.
pub fn predict_rows(args: &PredictArgs) -> CmdResult<Vec<String>> {
    let model = TrainedModel::load(&args.model).data(&format!("loading model {}", args.model.display()))?;
    let dir = match &args.sidecars {
        Some(d) => d.clone(),
        None => args
            .model
            .parent()
            .unwrap_or(Path::new("."))
            .join("../preprocess"),
    };
    let pre = load_preprocessor(&dir)?;
    let names: Vec<String> = read_json(&dir.join("labels.json"))?;

    let bytes = std::fs::read(&args.input).map_err(|e| {
        Failure::Data(anyhow::anyhow!("cannot read input {}: {e}", args.input.display()))
    })?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let required: Vec<Column> = Column::ALL
        .iter()
        .copied()
        .filter(|c| !IDENTIFIER_COLUMNS.contains(c))
        .collect();
    let table = match load_table_with(&bytes[..], &required) {
        Err(IngestError::EmptyTable) => return Ok(Vec::new()),
        r => r.data(&format!("ingest {}", args.input.display()))?,
    };
    let unseen = if args.unseen_as_new_code {
        UnseenCategory::ReservedCode
    } else {
        UnseenCategory::Reject
    };
    let x = pre.transform(&table, unseen).data("preprocess")?;
    if x.feature_names != model.feature_names {
        return Err(Failure::Data(anyhow::anyhow!(
            "feature mismatch: model expects [{}], sidecars produce [{}]",
            model.feature_names.join(", "),
            x.feature_names.join(", ")
        )));
    }
    info!("predict: {} rows with {}", x.n_rows(), model.name);
    let pred = model.predict(&x.values).data("predict")?;
    pred.into_iter()
        .map(|l| {
            names.get(l).cloned().ok_or_else(|| {
                Failure::Data(anyhow::anyhow!("model label {l} has no name in labels.json"))
            })
        })
        .collect()
}

pub fn run(args: &PredictArgs, out: &mut impl Write) -> CmdResult<()> {
    let labels = predict_rows(args)?;
    let mut s = String::new();
    if !labels.is_empty() {
        s.push_str("row_index,category\n");
    }
    for (i, l) in labels.iter().enumerate() {
        s.push_str(&format!("{i},{l}\n"));
    }
    out.write_all(s.as_bytes())
        .map_err(|e| Failure::Internal(anyhow::anyhow!("writing predictions: {e}")))
}
