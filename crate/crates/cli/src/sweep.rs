//! Trial-parallel sweeps. Trial `i` of every strategy shares seed, stream
//! id and therefore initial state, so strategy curves are paired.
//! Aggregation always runs in trial order, independent of thread count.

use std::path::Path;

use rayon::prelude::*;
use rayon::ThreadPool;

use raq_prep_core::engine::{run_observed, RandomizationStrategy, RunConfig, StrategyKind};
use raq_prep_core::hamiltonian::ProblemHamiltonian;

use crate::config::{Axis, FileConfig, Measure};
use crate::error::{CliError, CliResult};
use crate::output::{DifferenceRow, ScalingRow, SummaryRow};

/// Environment variable that overrides `--parallel`.
pub const THREADS_ENV: &str = "RAQ_PREP_THREADS";

/// Worker count: the environment override, else the flag, else all cores.
pub fn thread_count(flag: Option<usize>) -> CliResult<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")));
    }
    match flag {
        Some(0) => Err(CliError::Config("--parallel must be at least 1".into())),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn thread_pool(threads: usize) -> CliResult<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Run `f` for trials `0..trials` on `pool`; results come back in trial order.
pub fn par_trials<T, F>(pool: &ThreadPool, trials: usize, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> CliResult<T> + Sync,
{
    pool.install(|| (0..trials as u64).into_par_iter().map(&f).collect())
}

/// `1, 2, 5, 10, 20, 50, ...` up to `max`, always ending at `max`.
pub fn default_checkpoints(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let c = m * decade;
            if c >= max {
                break 'outer;
            }
            out.push(c);
        }
        decade *= 10;
    }
    out.push(max);
    out
}

/// Mean and standard error of the mean (zero for a single value).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares fit of `ln y` against `x`: `(slope, intercept, r_squared)`.
pub fn log_linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 || points.iter().any(|&(_, y)| y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { slope * sxy / syy };
    Some((slope, my - slope * mx, r2))
}

/// Figure of merit of one trial after each of `checkpoints` steps
/// (ascending; `0` means the initial state).
pub fn merits_at(cfg: &RunConfig, trial: u64, checkpoints: &[usize]) -> CliResult<Vec<f64>> {
    let h = &cfg.hamiltonian;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().take_while(|&&c| c == 0).count();
    let summary = run_observed(cfg, trial, |r| {
        while next < checkpoints.len() && checkpoints[next] == r.k + 1 {
            out.push(h.figure_of_merit(r.j_after));
            next += 1;
        }
    })?;
    // Checkpoint 0 and anything past an early stop.
    let mut full = Vec::with_capacity(checkpoints.len());
    let mut it = out.into_iter();
    for &c in checkpoints {
        full.push(match c {
            0 => h.figure_of_merit(summary.j_initial),
            c if c <= summary.steps_taken => it.next().unwrap_or(summary.final_merit),
            _ => summary.final_merit,
        });
    }
    Ok(full)
}

/// Trial-mean merit after every step `0..=max_steps`.
pub fn mean_merit_curve(pool: &ThreadPool, cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let h = &cfg.hamiltonian;
    let curves = par_trials(pool, cfg.trials, |trial| {
        let mut curve = Vec::with_capacity(cfg.max_steps + 1);
        let s = run_observed(cfg, trial, |r| {
            if curve.is_empty() {
                curve.push(h.figure_of_merit(r.j_before));
            }
            curve.push(h.figure_of_merit(r.j_after));
        })?;
        curve.resize(cfg.max_steps + 1, s.final_merit);
        Ok(curve)
    })?;
    let mut mean = vec![0.0; cfg.max_steps + 1];
    for c in &curves {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    let t = curves.len() as f64;
    mean.iter_mut().for_each(|m| *m /= t);
    Ok(mean)
}

/// Everything a sweep produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub summary: Vec<SummaryRow>,
    pub differences: Vec<DifferenceRow>,
    pub scaling: Vec<ScalingRow>,
}

fn check_increasing(values: &[usize], what: &str) -> CliResult<()> {
    if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!("{what} must be nonempty and strictly increasing")));
    }
    Ok(())
}

fn pool_size_of(strategy: &RandomizationStrategy) -> Option<usize> {
    match strategy {
        RandomizationStrategy::Pool { pool } => Some(pool.len()),
        _ => None,
    }
}

/// Run the sweep described by `cfg.sweep`.
pub fn run_sweep(cfg: &FileConfig, base_dir: Option<&Path>, pool: &ThreadPool) -> CliResult<SweepOutput> {
    if cfg.run.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if cfg.sweep.strategies.is_empty() {
        return Err(CliError::Config("sweep.strategies is empty".into()));
    }
    match cfg.sweep.axis {
        Axis::StepsM => {
            let h = cfg.hamiltonian(base_dir, None)?;
            sweep_steps(cfg, h, pool)
        }
        Axis::PoolSize => {
            let h = cfg.hamiltonian(base_dir, None)?;
            sweep_pool_size(cfg, h, pool)
        }
        Axis::NQubits => sweep_n_qubits(cfg, base_dir, pool),
    }
}

/// Merit versus step count for each strategy, plus the Haar/2-design
/// difference when both are present.
pub fn sweep_steps(cfg: &FileConfig, h: ProblemHamiltonian, pool: &ThreadPool) -> CliResult<SweepOutput> {
    let checkpoints = cfg.sweep.values.clone().unwrap_or_else(|| default_checkpoints(cfg.run.max_steps));
    check_increasing(&checkpoints, "checkpoints")?;
    let n = h.n_qubits();
    let mut out = SweepOutput::default();
    let mut curves: Vec<(StrategyKind, Vec<f64>)> = Vec::new();
    for &kind in &cfg.sweep.strategies {
        let mut run = cfg.run_config_with(h.clone(), kind)?;
        run.max_steps = *checkpoints.last().expect("nonempty");
        let per_trial = par_trials(pool, run.trials, |t| merits_at(&run, t, &checkpoints))?;
        let mut means = Vec::with_capacity(checkpoints.len());
        for (i, &m) in checkpoints.iter().enumerate() {
            let column: Vec<f64> = per_trial.iter().map(|v| v[i]).collect();
            let (mean, se) = mean_stderr(&column);
            means.push(mean);
            out.summary.push(SummaryRow {
                sweep_name: cfg.sweep.name.clone(),
                strategy: kind,
                n,
                m_checkpoint: m,
                pool_size: pool_size_of(&run.strategy),
                mean_alpha: mean,
                stderr_alpha: se,
                trials: run.trials,
                seed: run.seed,
            });
        }
        curves.push((kind, means));
    }
    let find = |k| curves.iter().find(|(kind, _)| *kind == k).map(|(_, c)| c);
    if let (Some(haar), Some(design)) = (find(StrategyKind::Haar), find(StrategyKind::TwoDesign)) {
        for (i, &m) in checkpoints.iter().enumerate() {
            out.differences.push(DifferenceRow {
                sweep_name: cfg.sweep.name.clone(),
                n,
                m_checkpoint: m,
                alpha_haar: haar[i],
                alpha_two_design: design[i],
                abs_difference: (haar[i] - design[i]).abs(),
                trials: cfg.run.trials,
                seed: cfg.run.seed,
            });
        }
    }
    Ok(out)
}

/// Sizes at which weight classes end in the weight-graded order.
pub fn weight_class_boundaries(n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut total = 0usize;
    let mut binom = 1usize;
    for w in 1..=n {
        binom = binom * (n - w + 1) / w;
        total += binom * 3usize.pow(w as u32);
        out.push(total);
    }
    out
}

/// Default pool-size grid: roughly three points per factor of ten plus
/// every weight-class boundary.
pub fn default_pool_sizes(n: usize) -> Vec<usize> {
    let full = (1usize << (2 * n)) - 1;
    let mut sizes = weight_class_boundaries(n);
    let mut decade = 1usize;
    while decade <= full {
        for m in [1, 2, 5] {
            let s = m * decade;
            if s >= 3 && s <= full {
                sizes.push(s);
            }
        }
        decade *= 10;
    }
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

fn pool_prefix_config(cfg: &FileConfig, h: ProblemHamiltonian, size: usize) -> CliResult<RunConfig> {
    let mut c = cfg.clone();
    c.strategy.pool = format!("size:{size}");
    c.strategy.pool_elements = None;
    c.run_config_with(h, StrategyKind::Pool)
}

fn final_merits(pool: &ThreadPool, run: &RunConfig) -> CliResult<Vec<f64>> {
    par_trials(pool, run.trials, |t| {
        let m = merits_at(run, t, &[run.max_steps])?;
        Ok(m[0])
    })
}

/// Merit at `max_steps` for growing prefixes of the weight-graded pool.
pub fn sweep_pool_size(cfg: &FileConfig, h: ProblemHamiltonian, pool: &ThreadPool) -> CliResult<SweepOutput> {
    let n = h.n_qubits();
    let sizes = cfg.sweep.values.clone().unwrap_or_else(|| default_pool_sizes(n));
    check_increasing(&sizes, "pool sizes")?;
    let mut out = SweepOutput::default();
    for &size in &sizes {
        let run = pool_prefix_config(cfg, h.clone(), size)?;
        let (mean, se) = mean_stderr(&final_merits(pool, &run)?);
        out.summary.push(SummaryRow {
            sweep_name: cfg.sweep.name.clone(),
            strategy: StrategyKind::Pool,
            n,
            m_checkpoint: run.max_steps,
            pool_size: Some(size),
            mean_alpha: mean,
            stderr_alpha: se,
            trials: run.trials,
            seed: run.seed,
        });
    }
    Ok(out)
}

/// Threshold crossings versus qubit count: the smallest `M` whose
/// trial-mean merit exceeds the threshold, or the smallest pool prefix
/// that gets there within `max_steps`.
pub fn sweep_n_qubits(cfg: &FileConfig, base_dir: Option<&Path>, pool: &ThreadPool) -> CliResult<SweepOutput> {
    let ns = cfg
        .sweep
        .values
        .clone()
        .ok_or_else(|| CliError::Config("qubit sweeps need sweep.values".into()))?;
    check_increasing(&ns, "qubit counts")?;
    let threshold = cfg.sweep.threshold;
    let mut out = SweepOutput::default();
    for &n in &ns {
        let h = cfg.hamiltonian(base_dir, Some(n))?;
        match cfg.sweep.measure {
            Measure::Steps => {
                for &kind in &cfg.sweep.strategies {
                    let run = cfg.run_config_with(h.clone(), kind)?;
                    let curve = mean_merit_curve(pool, &run)?;
                    let value = curve.iter().position(|&a| a > threshold);
                    out.scaling.push(ScalingRow {
                        sweep_name: cfg.sweep.name.clone(),
                        strategy: kind,
                        n,
                        measure: "steps".into(),
                        threshold,
                        value,
                        trials: run.trials,
                        seed: run.seed,
                    });
                }
            }
            Measure::PoolSize => {
                let sizes = cfg.sweep.pool_sizes.clone().unwrap_or_else(|| default_pool_sizes(n));
                let full = (1usize << (2 * n)) - 1;
                let mut value = None;
                for size in sizes.into_iter().filter(|&s| s <= full) {
                    let run = pool_prefix_config(cfg, h.clone(), size)?;
                    let (mean, _) = mean_stderr(&final_merits(pool, &run)?);
                    if mean > threshold {
                        value = Some(size);
                        break;
                    }
                }
                out.scaling.push(ScalingRow {
                    sweep_name: cfg.sweep.name.clone(),
                    strategy: StrategyKind::Pool,
                    n,
                    measure: "pool_size".into(),
                    threshold,
                    value,
                    trials: cfg.run.trials,
                    seed: cfg.run.seed,
                });
            }
        }
    }
    Ok(out)
}
