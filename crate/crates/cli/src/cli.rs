//! Argument parsing and the four subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use raq_prep_core::dilation::cooling_run;
use raq_prep_core::engine::{run, RunTrace};
use raq_prep_core::hamiltonian::ProblemHamiltonian;

use crate::config::{base_dir_of, FileConfig};
use crate::error::{CliError, CliResult};
use crate::output::{
    write_csv, write_jsonl, Manifest, OutputFormat, StepLine, SummaryRow, DIFFERENCE_CSV, SCALING_CSV, SUMMARY_CSV,
    SUMMARY_JSONL, TRACE_JSONL,
};
use crate::sweep::{default_checkpoints, log_linear_fit, mean_stderr, par_trials, run_sweep, thread_count, thread_pool};
use crate::verify::{format_table, verify_suite};

#[derive(Debug, Parser)]
#[command(name = "raq-prep", version, about = "Randomized adaptive state preparation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run independent trials of one configuration and export every step.
    Run(CommonArgs),
    /// Sweep steps, pool size or qubit count and export trial means.
    Sweep(CommonArgs),
    /// Check every bound and identity; nonzero exit on any failure.
    Verify(CommonArgs),
    /// Cool a mixed system state through ancilla dilation.
    Cool(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    /// Trials per configuration (overrides run.trials).
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; RAQ_PREP_THREADS takes precedence.
    #[arg(long)]
    parallel: Option<usize>,
}

impl CommonArgs {
    fn load(&self) -> CliResult<FileConfig> {
        let mut cfg = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.run.trials = t;
        }
        Ok(cfg)
    }

    fn base_dir(&self) -> Option<PathBuf> {
        base_dir_of(self.config.as_deref())
    }

    fn out_dir(&self) -> CliResult<&Path> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

/// Parse `argv` (program name first), run the command and return the exit
/// code: 0 success, 1 usage or configuration error, 2 runtime failure or a
/// failed verification.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Cool(a) => cmd_cool(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn checkpoint_rows(name: &str, traces: &[RunTrace], h_merit: impl Fn(f64) -> f64, pool_size: Option<usize>, cfg: &FileConfig) -> Vec<SummaryRow> {
    let Some(first) = traces.first() else { return Vec::new() };
    default_checkpoints(cfg.run.max_steps)
        .into_iter()
        .map(|m| {
            let merits: Vec<f64> = traces.iter().map(|t| h_merit(t.j_after_steps(m))).collect();
            let (mean, se) = mean_stderr(&merits);
            SummaryRow {
                sweep_name: name.into(),
                strategy: first.strategy,
                n: first.n_qubits,
                m_checkpoint: m,
                pool_size,
                mean_alpha: mean,
                stderr_alpha: se,
                trials: traces.len(),
                seed: cfg.run.seed,
            }
        })
        .collect()
}

fn write_traces(dir: &Path, traces: &[RunTrace]) -> CliResult<()> {
    write_jsonl(dir.join(TRACE_JSONL).as_path(), traces.iter().flat_map(|t| t.records.iter().map(StepLine::from)))
}

fn write_summary(dir: &Path, format: OutputFormat, rows: &[SummaryRow], outputs: &mut Vec<&'static str>) -> CliResult<()> {
    if format.csv() {
        write_csv(&dir.join(SUMMARY_CSV), rows)?;
        outputs.push(SUMMARY_CSV);
    }
    if format.jsonl() {
        write_jsonl(&dir.join(SUMMARY_JSONL), rows)?;
        outputs.push(SUMMARY_JSONL);
    }
    Ok(())
}

fn report_traces(what: &str, traces: &[RunTrace], started: Instant) {
    let finals: Vec<f64> = traces.iter().map(|t| t.final_merit).collect();
    let (mean, se) = mean_stderr(&finals);
    println!("{what}: {} trials, final merit {mean:.6} +- {se:.6}", traces.len());
    eprintln!("elapsed {:.2}s", started.elapsed().as_secs_f64());
}

fn cmd_run(a: &CommonArgs) -> CliResult<()> {
    let cfg = a.load()?;
    let run_cfg = cfg.run_config(a.base_dir().as_deref())?;
    let pool = thread_pool(thread_count(a.parallel)?)?;
    let dir = a.out_dir()?;
    let started = Instant::now();
    let traces = par_trials(&pool, run_cfg.trials, |t| Ok(run(&run_cfg, t)?))?;
    let h: &ProblemHamiltonian = &run_cfg.hamiltonian;
    let pool_size = match &run_cfg.strategy {
        raq_prep_core::engine::RandomizationStrategy::Pool { pool } => Some(pool.len()),
        _ => None,
    };
    let rows = checkpoint_rows("run", &traces, |j| h.figure_of_merit(j), pool_size, &cfg);
    let mut outputs = Vec::new();
    if a.format.jsonl() {
        write_traces(dir, &traces)?;
        outputs.push(TRACE_JSONL);
    }
    write_summary(dir, a.format, &rows, &mut outputs)?;
    Manifest::new("run", &cfg, a.format, outputs).write(dir)?;
    report_traces("run", &traces, started);
    Ok(())
}

fn cmd_cool(a: &CommonArgs) -> CliResult<()> {
    let cfg = a.load()?;
    let cool = cfg.cooling_config()?;
    let pool = thread_pool(thread_count(a.parallel)?)?;
    let dir = a.out_dir()?;
    let started = Instant::now();
    let traces = par_trials(&pool, cool.trials, |t| Ok(cooling_run(&cool, t)?))?;
    let rows = checkpoint_rows("cool", &traces, |j| 1.0 - j, None, &cfg);
    let mut outputs = Vec::new();
    if a.format.jsonl() {
        write_traces(dir, &traces)?;
        outputs.push(TRACE_JSONL);
    }
    write_summary(dir, a.format, &rows, &mut outputs)?;
    Manifest::new("cool", &cfg, a.format, outputs).write(dir)?;
    report_traces("cool", &traces, started);
    Ok(())
}

fn cmd_sweep(a: &CommonArgs) -> CliResult<()> {
    let cfg = a.load()?;
    let pool = thread_pool(thread_count(a.parallel)?)?;
    let dir = a.out_dir()?;
    let started = Instant::now();
    let out = run_sweep(&cfg, a.base_dir().as_deref(), &pool)?;
    let mut outputs = Vec::new();
    if !out.summary.is_empty() {
        write_summary(dir, a.format, &out.summary, &mut outputs)?;
    }
    if !out.differences.is_empty() {
        if a.format.csv() {
            write_csv(&dir.join(DIFFERENCE_CSV), &out.differences)?;
            outputs.push(DIFFERENCE_CSV);
        }
        if a.format.jsonl() {
            write_jsonl(&dir.join("difference.jsonl"), &out.differences)?;
            outputs.push("difference.jsonl");
        }
        let worst = out.differences.iter().map(|d| d.abs_difference).fold(0.0, f64::max);
        println!("max |alpha_haar - alpha_two_design| = {worst:.6}");
    }
    if !out.scaling.is_empty() {
        if a.format.csv() {
            write_csv(&dir.join(SCALING_CSV), &out.scaling)?;
            outputs.push(SCALING_CSV);
        }
        if a.format.jsonl() {
            write_jsonl(&dir.join("scaling.jsonl"), &out.scaling)?;
            outputs.push("scaling.jsonl");
        }
        for row in &out.scaling {
            match row.value {
                Some(v) => println!("{} n={} {} = {v}", row.strategy, row.n, row.measure),
                None => println!("{} n={} {} not reached", row.strategy, row.n, row.measure),
            }
        }
        let pts: Vec<(f64, f64)> = out.scaling.iter().filter_map(|r| r.value.map(|v| (r.n as f64, v as f64))).collect();
        if let Some((slope, _, r2)) = log_linear_fit(&pts) {
            println!("log-linear fit: slope {slope:.4}, R^2 {r2:.4}");
        }
    }
    Manifest::new("sweep", &cfg, a.format, outputs).write(dir)?;
    println!("sweep {}: {} summary rows", cfg.sweep.name, out.summary.len());
    eprintln!("elapsed {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_verify(a: &CommonArgs) -> CliResult<()> {
    let cfg = a.load()?;
    let dir = a.out_dir()?;
    let reports = verify_suite(cfg.run.seed)?;
    let mut outputs = Vec::new();
    if a.format.csv() {
        let rows: Vec<VerifyRow> = reports.iter().map(VerifyRow::from).collect();
        write_csv(&dir.join("verify.csv"), &rows)?;
        outputs.push("verify.csv");
    }
    if a.format.jsonl() {
        write_jsonl(&dir.join("verify.jsonl"), &reports)?;
        outputs.push("verify.jsonl");
    }
    Manifest::new("verify", &cfg, a.format, outputs).write(dir)?;
    print!("{}", format_table(&reports));
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} of {} checks failed", reports.len())));
    }
    println!("all {} checks passed", reports.len());
    Ok(())
}

#[derive(serde::Serialize)]
struct VerifyRow<'a> {
    check: &'a str,
    lhs: f64,
    rhs: f64,
    tolerance: f64,
    margin: f64,
    satisfied: bool,
    conclusive: bool,
    samples: Option<usize>,
}

impl<'a> From<&'a raq_prep_core::bounds::BoundReport> for VerifyRow<'a> {
    fn from(r: &'a raq_prep_core::bounds::BoundReport) -> Self {
        Self {
            check: &r.name,
            lhs: r.lhs,
            rhs: r.rhs,
            tolerance: r.tolerance,
            margin: r.margin,
            satisfied: r.satisfied,
            conclusive: r.conclusive,
            samples: r.sample_count,
        }
    }
}
