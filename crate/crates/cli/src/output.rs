//! Output files. CSV headers and JSON-lines fields are part of the
//! interface and must not change without a version bump.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use raq_prep_core::engine::{StepRecord, StrategyKind};

use crate::config::FileConfig;
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Jsonl,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn jsonl(self) -> bool {
        matches!(self, OutputFormat::Jsonl | OutputFormat::Both)
    }
}

/// One line of `trace.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLine {
    pub k: usize,
    #[serde(rename = "J_before")]
    pub j_before: f64,
    #[serde(rename = "J_after")]
    pub j_after: f64,
    pub gradient: f64,
    pub theta: f64,
    pub strategy: StrategyKind,
    pub stream_id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

impl From<&StepRecord> for StepLine {
    fn from(r: &StepRecord) -> Self {
        Self {
            k: r.k,
            j_before: r.j_before,
            j_after: r.j_after,
            gradient: r.gradient,
            theta: r.theta,
            strategy: r.strategy,
            stream_id: r.stream_id,
            purity: r.purity,
            fidelity: r.fidelity,
        }
    }
}

/// Row of `summary.csv`: trial-mean figure of merit at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_name: String,
    pub strategy: StrategyKind,
    pub n: usize,
    #[serde(rename = "M_checkpoint")]
    pub m_checkpoint: usize,
    /// Pool size for pool strategies, empty otherwise.
    pub pool_size: Option<usize>,
    pub mean_alpha: f64,
    pub stderr_alpha: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Row of `difference.csv`: paired Haar and 2-design means at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceRow {
    pub sweep_name: String,
    pub n: usize,
    #[serde(rename = "M_checkpoint")]
    pub m_checkpoint: usize,
    pub alpha_haar: f64,
    pub alpha_two_design: f64,
    pub abs_difference: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Row of `scaling.csv`: threshold crossing for one qubit count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub sweep_name: String,
    pub strategy: StrategyKind,
    pub n: usize,
    /// `steps` or `pool_size`.
    pub measure: String,
    pub threshold: f64,
    /// Smallest `M` or `|A|` whose mean merit exceeds the threshold; empty
    /// when none of the tried values does.
    pub value: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSONL: &str = "summary.jsonl";
pub const DIFFERENCE_CSV: &str = "difference.csv";
pub const SCALING_CSV: &str = "scaling.csv";
pub const TRACE_JSONL: &str = "trace.jsonl";
pub const MANIFEST: &str = "manifest.json";

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to rerun a command and get identical files.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub trials: usize,
    pub format: OutputFormat,
    pub config: &'a FileConfig,
    pub outputs: Vec<&'static str>,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, config: &'a FileConfig, format: OutputFormat, outputs: Vec<&'static str>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.run.seed,
            trials: config.run.trials,
            format,
            config,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let mut w = BufWriter::new(File::create(dir.join(MANIFEST))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}
