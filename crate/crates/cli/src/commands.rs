//! `report` and `synth`.

use std::path::PathBuf;

use jcat_core::evaluate::EvalReport;
use jcat_core::ingest::synthesize_dataset;
use log::info;

use crate::config::ReportFormat;
use crate::failure::{CmdResult, DataContext, Failure};
use crate::output::ArtifactWriter;
use crate::pipeline::write_report;

pub fn report(input: &PathBuf, out: &PathBuf, formats: &[ReportFormat]) -> CmdResult<()> {
    let bytes = std::fs::read(input).map_err(|e| {
        Failure::Data(anyhow::anyhow!("cannot read report {}: {e}", input.display()))
    })?;
    let report = EvalReport::read_csv(&bytes[..]).data(&format!("report {}", input.display()))?;
    if report.is_empty() {
        return Err(Failure::Data(anyhow::anyhow!(
            "report {} has no rows",
            input.display()
        )));
    }
    let mut w = ArtifactWriter::new(out);
    write_report(&mut w, "", &report, formats)?;
    info!("report: {} rows, {} files in {}", report.len(), w.artifacts().len(), out.display());
    Ok(())
}

pub fn synth(n: usize, seed: u64, out: &PathBuf, tiers: Option<&PathBuf>) -> CmdResult<()> {
    let ds = synthesize_dataset(n, seed).map_err(|e| crate::failure::config(e))?;
    let mut buf = Vec::new();
    ds.table.write_csv(&mut buf).data("synth")?;
    crate::output::write_atomic(out, &buf)?;
    if let Some(p) = tiers {
        let mut s = String::from("row_index,tier\n");
        for (i, t) in ds.tiers.iter().enumerate() {
            s.push_str(&format!("{i},{t:?}\n"));
        }
        crate::output::write_atomic(p, s.as_bytes())?;
    }
    info!("synth: {n} rows -> {}", out.display());
    Ok(())
}
