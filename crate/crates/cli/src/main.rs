use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jcat_core::preprocess::ImputePolicy;

mod commands;
mod config;
mod failure;
mod output;
mod pipeline;
mod predict;

use config::{Overrides, PipelineConfig, ReportFormat};
use failure::{CmdResult, Failure};

#[derive(Parser)]
#[command(name = "jcat", version, about = "Journal categorization pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImputeArg {
    Fail,
    ColumnMedian,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
    Svg,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write every artifact under the output directory.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Training fraction of the percentage split.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        folds: Option<usize>,
        /// Number of clusters.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        reference_year: Option<i32>,
        #[arg(long, value_enum)]
        impute: Option<ImputeArg>,
        /// Fit scaling and feature selection once on all rows before splitting.
        #[arg(long)]
        paper_faithful_selection: bool,
        /// Disable data parallelism.
        #[arg(long)]
        sequential: bool,
    },
    /// Label new journal rows with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Directory holding the preprocessing sidecars (default: <model dir>/../preprocess).
        #[arg(long)]
        sidecars: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        /// Give unseen categorical values a reserved code instead of failing.
        #[arg(long)]
        unseen_as_new_code: bool,
    },
    /// Render tables and charts from a saved report CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        format: FormatArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write a synthetic journal table.
    Synth {
        #[arg(long, default_value_t = 340)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the generating tier of every row.
        #[arg(long)]
        tiers: Option<PathBuf>,
    },
}

fn formats(f: FormatArg) -> Vec<ReportFormat> {
    match f {
        FormatArg::Csv => vec![ReportFormat::Csv],
        FormatArg::Markdown => vec![ReportFormat::Markdown],
        FormatArg::Svg => vec![ReportFormat::Svg],
        FormatArg::All => vec![ReportFormat::Markdown, ReportFormat::Svg],
    }
}

fn run(cli: Cli) -> CmdResult<()> {
    match cli.command {
        Command::Pipeline {
            config,
            input,
            out,
            seed,
            ratio,
            folds,
            k,
            reference_year,
            impute,
            paper_faithful_selection,
            sequential,
        } => {
            let (file, text, base) = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| {
                        failure::config(format!("cannot read config {}: {e}", p.display()))
                    })?;
                    let base = p.parent().unwrap_or(Path::new(".")).to_path_buf();
                    (PipelineConfig::from_toml(&text)?, text, base)
                }
                None => (PipelineConfig::default(), String::new(), PathBuf::from(".")),
            };
            let o = Overrides {
                input,
                output: out,
                seed,
                ratio,
                folds,
                k,
                reference_year,
                impute: impute.map(|i| match i {
                    ImputeArg::Fail => ImputePolicy::Fail,
                    ImputeArg::ColumnMedian => ImputePolicy::ColumnMedian,
                }),
                paper_faithful_selection,
                sequential,
            };
            let resolved = file.resolve(&base, &o)?;
            pipeline::run(&resolved, &text)
        }
        Command::Predict {
            model,
            sidecars,
            input,
            unseen_as_new_code,
        } => {
            let args = predict::PredictArgs {
                model,
                sidecars,
                input,
                unseen_as_new_code,
            };
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            predict::run(&args, &mut lock)?;
            lock.flush()
                .map_err(|e| Failure::Internal(anyhow::anyhow!("flushing stdout: {e}")))
        }
        Command::Report { input, format, out } => commands::report(&input, &out, &formats(format)),
        Command::Synth { n, seed, out, tiers } => commands::synth(n, seed, &out, tiers.as_ref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
