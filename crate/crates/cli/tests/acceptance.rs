//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run everything with `cargo test -p raq-prep --test acceptance`; pass
//! name fragments after `--` to run a subset (`-- haar_vs_design_n6 cooling`).

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use raq_prep::sweep::{default_checkpoints, log_linear_fit, mean_merit_curve, par_trials, thread_count, thread_pool};
use raq_prep::verify::{gradient_checks, pool_checks, step_bound_checks, two_design_checks, cooling_gradient_checks};
use raq_prep_core::bounds::{BoundReport, McFlavor};
use raq_prep_core::dilation::{cooling_run, CoolingConfig};
use raq_prep_core::engine::{run_observed, RandomizationStrategy, RunConfig, StrategyKind};
use raq_prep_core::hamiltonian::{ising_from_graph, Graph, ProblemHamiltonian};
use raq_prep_core::linalg::{weight_graded_pool, Pauli, PauliString, StateVector};
use raq_prep_core::random::{random_regular_graph, RngStream, TwoDesignConfig};
use rayon::ThreadPool;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Res<Verdict> {
    Ok(Verdict { passed, detail: detail.into() })
}

fn all_passed(reports: &[BoundReport]) -> bool {
    reports.iter().all(BoundReport::passed)
}

fn brief(r: &BoundReport) -> String {
    format!("{}: lhs={:.6e} rhs={:.6e}", r.name, r.lhs, r.rhs)
}

fn strategy(kind: StrategyKind, n: usize) -> Res<RandomizationStrategy> {
    let generator = PauliString::single(n, 0, Pauli::X)?;
    Ok(match kind {
        StrategyKind::Haar => RandomizationStrategy::Haar { generator },
        StrategyKind::TwoDesign => RandomizationStrategy::TwoDesign { generator, design: TwoDesignConfig::default() },
        StrategyKind::Pool => RandomizationStrategy::Pool { pool: weight_graded_pool(n)? },
    })
}

fn config(h: &ProblemHamiltonian, kind: StrategyKind, max_steps: usize, trials: usize) -> Res<RunConfig> {
    let mut cfg = RunConfig::new(h.clone(), strategy(kind, h.n_qubits())?);
    cfg.max_steps = max_steps;
    cfg.trials = trials;
    cfg.seed = SEED;
    Ok(cfg)
}

fn complete(n: usize) -> Res<ProblemHamiltonian> {
    Ok(ising_from_graph(&Graph::complete(n)?)?)
}

fn gradient_correctness(_: &ThreadPool) -> Res<Verdict> {
    let reports = gradient_checks(200, &mut RngStream::new(SEED, 10))?;
    verdict(all_passed(&reports), format!("200 triples, n=1..4; {}; {}", brief(&reports[0]), brief(&reports[1])))
}

fn step_bound(_: &ThreadPool) -> Res<Verdict> {
    let steps = 1200;
    let reports = step_bound_checks(&[2, 4, 6], steps, SEED)?;
    let violations: f64 = reports.iter().map(|r| r.details.get("violations").copied().unwrap_or(0.0)).sum();
    let worst = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    verdict(
        all_passed(&reports) && violations == 0.0,
        format!("{} steps, 3 strategies x n in {{2,4,6}}; violations={violations}, worst margin={worst:.3e}", steps * reports.len()),
    )
}

fn monotonic_convergence(pool: &ThreadPool) -> Res<Verdict> {
    let cases = [
        ("n=2 edge", ising_from_graph(&Graph::unweighted(2, vec![(0, 1)])?)?),
        ("n=4 edge", ising_from_graph(&Graph::unweighted(4, vec![(0, 1)])?)?),
        ("n=4 K4", complete(4)?),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, h) in cases {
        let cfg = config(&h, StrategyKind::Haar, 5000, 100)?;
        let per_trial = par_trials(pool, cfg.trials, |t| {
            let mut monotone = true;
            let s = run_observed(&cfg, t, |r| monotone &= r.delta_j >= -1e-12)?;
            Ok((monotone, s.final_merit))
        })?;
        let monotone = per_trial.iter().filter(|p| p.0).count();
        let converged = per_trial.iter().filter(|p| p.1 > 0.99).count();
        passed &= monotone == cfg.trials && converged * 100 >= 95 * cfg.trials;
        parts.push(format!("{label}: monotone {monotone}/100, alpha>0.99 {converged}/100"));
    }
    verdict(passed, parts.join("; "))
}

fn mc_reports(prefix: &str) -> Res<Vec<BoundReport>> {
    let reports = two_design_checks(&[McFlavor::Haar, McFlavor::Clifford], 10_000, &mut RngStream::new(SEED, 11))?;
    Ok(reports.into_iter().filter(|r| r.name.starts_with(prefix)).collect())
}

fn second_moment(_: &ThreadPool) -> Res<Verdict> {
    let reports = mc_reports("second_moment_identity")?;
    let n1 = reports
        .iter()
        .find(|r| r.name.contains("n=1"))
        .ok_or("missing n=1 case")?;
    let target_ok = (n1.rhs - 4.0 / 3.0).abs() < 1e-12;
    let worst_sigmas = reports
        .iter()
        .map(|r| (r.lhs - r.rhs).abs() / (r.tolerance / 3.0))
        .fold(0.0, f64::max);
    verdict(
        all_passed(&reports) && target_ok,
        format!("{} cases, haar+clifford, 1e4 samples; n=1 target {:.6}; worst {worst_sigmas:.2} sigma", reports.len(), n1.rhs),
    )
}

fn two_design_bound(_: &ThreadPool) -> Res<Verdict> {
    let reports = mc_reports("two_design_bound")?;
    let n1 = reports.iter().find(|r| r.name.contains("n=1")).ok_or("missing n=1 case")?;
    let target_ok = (n1.rhs - 1.0 / 6.0).abs() < 1e-12;
    verdict(
        all_passed(&reports) && target_ok,
        format!("{} cases at 99% confidence; {}", reports.len(), brief(n1)),
    )
}

fn pool_bound(_: &ThreadPool) -> Res<Verdict> {
    let reports = pool_checks(20, &mut RngStream::new(SEED, 12))?;
    let xyz = &reports[0];
    let closed_form = (xyz.lhs - 1f64.sin() / 3.0).abs() < 1e-12 && (xyz.rhs - 1.0 / 6.0).abs() < 1e-12;
    let violations = reports[1].details.get("violations").copied().unwrap_or(f64::NAN);
    verdict(
        all_passed(&reports) && closed_form,
        format!("{}; full n=2 pool on 20 states: violations={violations}", brief(xyz)),
    )
}

/// Largest gap between the Haar and 2-design trial-mean curves on a
/// 3-regular graph, over every step up to `10^4`.
fn haar_vs_design(pool: &ThreadPool, n: usize) -> Res<Verdict> {
    let graph = random_regular_graph(n, 3, &mut RngStream::new(SEED, 0))?;
    let h = ising_from_graph(&graph)?;
    let haar = mean_merit_curve(pool, &config(&h, StrategyKind::Haar, 10_000, 100)?)?;
    let design = mean_merit_curve(pool, &config(&h, StrategyKind::TwoDesign, 10_000, 100)?)?;
    let (at, gap) = haar
        .iter()
        .zip(&design)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |acc, (m, d)| if d > acc.1 { (m, d) } else { acc });
    verdict(
        gap <= 0.02,
        format!(
            "100 paired trials, M=1e4; max |haar - 2design| = {gap:.4} at M={at}; final alpha {:.4} / {:.4}",
            haar[haar.len() - 1],
            design[design.len() - 1]
        ),
    )
}

fn haar_vs_design_n6(pool: &ThreadPool) -> Res<Verdict> {
    haar_vs_design(pool, 6)
}

fn haar_vs_design_n8(pool: &ThreadPool) -> Res<Verdict> {
    haar_vs_design(pool, 8)
}

fn strategy_agreement(pool: &ThreadPool) -> Res<Verdict> {
    let kinds = [StrategyKind::Haar, StrategyKind::TwoDesign, StrategyKind::Pool];
    let mut passed = true;
    let mut parts = Vec::new();
    for (n, max_steps) in [(4, 5000), (6, 20_000)] {
        let h = complete(n)?;
        let curves = kinds
            .iter()
            .map(|&k| Ok(mean_merit_curve(pool, &config(&h, k, max_steps, 50)?)?))
            .collect::<Res<Vec<_>>>()?;
        let finals: Vec<f64> = curves.iter().map(|c| c[max_steps]).collect();
        let mut gap = 0.0f64;
        for m in default_checkpoints(max_steps) {
            let vals = curves.iter().map(|c| c[m]);
            let hi = vals.clone().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.fold(f64::INFINITY, f64::min);
            gap = gap.max(hi - lo);
        }
        passed &= finals.iter().all(|&a| a > 0.99) && gap <= 0.05;
        parts.push(format!(
            "K{n} M={max_steps}: final alpha haar/2design/pool {:.4}/{:.4}/{:.4}, max spread {gap:.4}",
            finals[0], finals[1], finals[2]
        ));
    }
    verdict(passed, parts.join("; "))
}

fn step_scaling(pool: &ThreadPool) -> Res<Verdict> {
    let mut points = Vec::new();
    let mut crossings = Vec::new();
    for n in 3..=7 {
        let curve = mean_merit_curve(pool, &config(&complete(n)?, StrategyKind::Haar, 40_000, 20)?)?;
        let Some(m) = curve.iter().position(|&a| a > 0.99) else {
            return verdict(false, format!("K{n}: trial-mean alpha never exceeds 0.99 within 4e4 steps"));
        };
        crossings.push(m);
        points.push((n as f64, m as f64));
    }
    let increasing = crossings.windows(2).all(|w| w[0] < w[1]);
    let (slope, _, r2) = log_linear_fit(&points).ok_or("degenerate fit")?;
    verdict(
        increasing && slope > 0.0 && r2 > 0.9,
        format!("haar, 20 trials, M*(n=3..7) = {crossings:?}; log-linear slope {slope:.3}, R^2 {r2:.3}"),
    )
}

fn cooling(pool: &ThreadPool) -> Res<Verdict> {
    let mut cfg = CoolingConfig::new(StateVector::from_label("0")?, 1)?;
    cfg.max_steps = 2000;
    cfg.trials = 100;
    cfg.seed = SEED;
    let finals = par_trials(pool, cfg.trials, |t| Ok(cooling_run(&cfg, t)?.final_merit))?;
    let ok = finals.iter().filter(|&&f| f >= 0.99).count();
    let fd = cooling_gradient_checks(100, &mut RngStream::new(SEED, 13))?;
    verdict(
        ok * 100 >= 90 * cfg.trials && all_passed(&fd),
        format!("1+1 qubits from I/2, M=2000: fidelity>=0.99 in {ok}/100; {}", brief(&fd[1])),
    )
}

const DETERMINISM_SWEEP: &str = r#"
[problem]
graph = "regular:6:3:5"

[run]
max_steps = 300
trials = 4

[sweep]
name = "det"
strategies = ["haar", "two_design", "pool"]
"#;

fn invoke(args: &[&str], threads: &str) -> Res<()> {
    let status = Command::new(env!("CARGO_BIN_EXE_raq-prep"))
        .args(args)
        .env("RAQ_PREP_THREADS", threads)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()?;
    if !status.success() {
        return Err(format!("raq-prep {args:?} exited with {status}").into());
    }
    Ok(())
}

fn files_of(dir: &Path) -> Res<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        out.push((entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path())?));
    }
    out.sort();
    Ok(out)
}

/// Every subcommand twice with the same seed, once serial and once on
/// several threads; the output directories must match byte for byte.
fn determinism(_: &ThreadPool) -> Res<Verdict> {
    let tmp = tempfile::tempdir()?;
    let cfg_path = tmp.path().join("sweep.toml");
    std::fs::write(&cfg_path, DETERMINISM_SWEEP)?;
    let cfg = cfg_path.to_str().ok_or("non-UTF-8 temp path")?;
    let commands: [(&str, Vec<&str>); 4] = [
        ("run", vec!["run", "--config", cfg, "--trials", "3"]),
        ("sweep", vec!["sweep", "--config", cfg]),
        ("cool", vec!["cool", "--trials", "3"]),
        ("verify", vec!["verify"]),
    ];
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (name, args) in &commands {
        let mut dirs = Vec::new();
        for (i, threads) in ["1", "3"].iter().enumerate() {
            let out = tmp.path().join(format!("{name}-{i}"));
            let out_str = out.to_str().ok_or("non-UTF-8 temp path")?.to_owned();
            let mut full = args.clone();
            full.extend(["--seed", "99", "--out", &out_str]);
            invoke(&full, threads)?;
            dirs.push(files_of(&out)?);
        }
        files += dirs[0].len();
        if dirs[0].is_empty() || dirs[0] != dirs[1] {
            mismatched.push(*name);
        }
    }
    verdict(
        mismatched.is_empty(),
        format!("run/sweep/cool/verify, 1 vs 3 threads: {files} files compared, mismatched commands {mismatched:?}"),
    )
}

type Check = fn(&ThreadPool) -> Res<Verdict>;

fn main() {
    let criteria: &[(&str, Check, Duration)] = &[
        ("gradient_correctness", gradient_correctness, Duration::from_secs(10)),
        ("step_bound", step_bound, Duration::from_secs(300)),
        ("monotonic_convergence", monotonic_convergence, Duration::from_secs(120)),
        ("second_moment_identity", second_moment, Duration::from_secs(60)),
        ("two_design_bound", two_design_bound, Duration::from_secs(60)),
        ("pool_bound", pool_bound, Duration::from_secs(10)),
        ("haar_vs_design_n6", haar_vs_design_n6, Duration::from_secs(15 * 60)),
        ("haar_vs_design_n8", haar_vs_design_n8, Duration::from_secs(4 * 3600)),
        ("strategy_agreement", strategy_agreement, Duration::from_secs(3600)),
        ("step_scaling", step_scaling, Duration::from_secs(3600)),
        ("cooling", cooling, Duration::from_secs(120)),
        ("determinism", determinism, Duration::from_secs(300)),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let pool = thread_pool(thread_count(None).expect("thread count")).expect("thread pool");

    let mut failed = 0;
    let mut ran = 0;
    for (name, check, budget) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = check(&pool);
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(v) if elapsed > *budget => (false, format!("{} [over time budget {budget:?}]", v.detail)),
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!("{} {name} ({:.1}s): {detail}", if passed { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    println!("{} of {ran} acceptance criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
