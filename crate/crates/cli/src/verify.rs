//! The bound-verification suite behind `raq-prep verify`.

use raq_prep_core::bounds::{
    check_trace_step_bounds, lipschitz_constant, lipschitz_empirical, m_upper_bound, pool_average_bound,
    verify_two_design_bound_mc, BoundReport, McFlavor,
};
use raq_prep_core::dilation::{cooling_gradient, cooling_gradient_closed, cooling_gradient_fast, DilatedState};
use raq_prep_core::engine::{
    gradient_exact, gradient_finite_difference, gradient_hilbert_schmidt, run, Direction, RandomizationStrategy,
    RunConfig,
};
use raq_prep_core::hamiltonian::{ising_from_graph, Graph, ProblemHamiltonian};
use raq_prep_core::linalg::{weight_graded_pool, DensityMatrix, Pauli, PauliString, StateVector};
use raq_prep_core::random::{random_state, HouseholderUnitary, RngStream, SampledUnitary, TwoDesignConfig};

use crate::error::CliResult;

/// Monte Carlo sample count for the 2-design checks.
pub const MC_SAMPLES: usize = 10_000;

fn named(mut r: BoundReport, name: impl Into<String>) -> BoundReport {
    r.name = name.into();
    r
}

fn z() -> ProblemHamiltonian {
    ProblemHamiltonian::from_diagonal(1, vec![1.0, -1.0]).expect("valid diagonal")
}

/// Random Ising instance on `n` vertices with each edge kept with
/// probability 1/2 (at least one edge).
pub fn random_ising(n: usize, rng: &mut RngStream) -> CliResult<ProblemHamiltonian> {
    use rand::Rng;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.5) {
                edges.push((u, v, rng.random_range(0.5..1.5)));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, n - 1, 1.0));
    }
    Ok(ising_from_graph(&Graph::new(n, edges)?)?)
}

/// A single-qubit Hamiltonian `Z` or, for `n > 1`, a random Ising instance.
fn random_problem(n: usize, rng: &mut RngStream) -> CliResult<ProblemHamiltonian> {
    if n == 1 {
        Ok(z())
    } else {
        random_ising(n, rng)
    }
}

fn haar_direction(n: usize, rng: &mut RngStream) -> CliResult<Direction> {
    Ok(Direction::Conjugated {
        generator: PauliString::single(n, 0, Pauli::X)?,
        unitary: SampledUnitary::Haar(HouseholderUnitary::sample(n, rng)?),
        label: "haar",
    })
}

/// Worst disagreement of the commutator gradient with the Hilbert-Schmidt
/// form and with central differences, over `triples` random cases spread
/// over 1 to 4 qubits.
pub fn gradient_checks(triples: usize, rng: &mut RngStream) -> CliResult<[BoundReport; 2]> {
    let (mut worst_hs, mut worst_fd) = (0.0f64, 0.0f64);
    for i in 0..triples {
        let n = 1 + i % 4;
        let h = random_problem(n, rng)?;
        let psi = random_state(n, rng)?;
        let dir = haar_direction(n, rng)?;
        let g = gradient_exact(&psi, &dir, &h)?;
        worst_hs = worst_hs.max((g - gradient_hilbert_schmidt(&psi, &dir.to_dense(), &h)?).abs());
        worst_fd = worst_fd.max((g - gradient_finite_difference(&psi, &dir, &h, 1e-5)?).abs());
    }
    Ok([
        BoundReport::two_sided("gradient_hilbert_schmidt_agreement", worst_hs, 0.0, 1e-10),
        BoundReport::two_sided("gradient_finite_difference_agreement", worst_fd, 0.0, 1e-6),
    ])
}

/// Step bound over every step of exact-mode runs for all strategies.
pub fn step_bound_checks(ns: &[usize], steps: usize, seed: u64) -> CliResult<Vec<BoundReport>> {
    let mut out = Vec::new();
    for &n in ns {
        let h = ising_from_graph(&Graph::complete(n)?)?;
        let gen = PauliString::single(n, 0, Pauli::X)?;
        for strategy in [
            RandomizationStrategy::Haar { generator: gen.clone() },
            RandomizationStrategy::TwoDesign { generator: gen.clone(), design: TwoDesignConfig::default() },
            RandomizationStrategy::Pool { pool: weight_graded_pool(n)? },
        ] {
            let kind = strategy.kind();
            let mut cfg = RunConfig::new(h.clone(), strategy);
            cfg.max_steps = steps;
            cfg.seed = seed;
            let trace = run(&cfg, 0)?;
            out.push(named(check_trace_step_bounds(&trace, &h)?, format!("step_bound[{kind},n={n}]")));
        }
    }
    Ok(out)
}

/// Step-count bound on single-edge runs: passes when every trial reaches
/// epsilon and stays under its bound.
pub fn m_bound_check(trials: usize, epsilon: f64, seed: u64) -> CliResult<BoundReport> {
    let h = ising_from_graph(&Graph::unweighted(2, vec![(0, 1)])?)?;
    let mut cfg = RunConfig::new(h.clone(), RandomizationStrategy::Haar { generator: PauliString::single(2, 0, Pauli::X)? });
    cfg.max_steps = 2000;
    cfg.seed = seed;
    let mut ok = 0usize;
    let mut worst_ratio = 0.0f64;
    for t in 0..trials as u64 {
        let rep = m_upper_bound(&run(&cfg, t)?, &h, epsilon);
        if rep.passed() {
            ok += 1;
        }
        if rep.lhs.is_finite() && rep.lhs > 0.0 {
            worst_ratio = worst_ratio.max(rep.rhs / rep.lhs);
        }
    }
    let mut rep = BoundReport::lower("m_bound[single_edge]", ok as f64, trials as f64, 0.0);
    rep.sample_count = Some(trials);
    rep.details.insert("epsilon".into(), epsilon);
    rep.details.insert("max_observed_over_bound".into(), worst_ratio);
    Ok(rep)
}

/// Lipschitz constant values and sampled slopes on 1 to 3 qubits.
pub fn lipschitz_checks(pairs: usize, rng: &mut RngStream) -> CliResult<Vec<BoundReport>> {
    let x: PauliString = "X".parse()?;
    let k4 = ising_from_graph(&Graph::complete(4)?)?;
    let mut out = vec![
        BoundReport::two_sided("lipschitz_value[Z,X]", lipschitz_constant(&z(), &x), 4.0, 0.0),
        BoundReport::two_sided("lipschitz_value[K4,X1]", lipschitz_constant(&k4, &PauliString::single(4, 0, Pauli::X)?), 24.0, 0.0),
    ];
    for n in 1..=3 {
        let h = random_problem(n, rng)?;
        let gen = PauliString::single(n, 0, Pauli::X)?;
        let dir = haar_direction(n, rng)?;
        let psi = random_state(n, rng)?;
        let l = lipschitz_constant(&h, &gen);
        out.push(named(lipschitz_empirical(&h, &dir, &psi, l, pairs, rng)?, format!("lipschitz_slopes[n={n}]")));
    }
    Ok(out)
}

/// Expected-improvement bound and second-moment identity for the given
/// flavors on `(X, Z, |+>)`, `(X1, Z1Z2, |++>)` and a random 2-qubit case.
pub fn two_design_checks(flavors: &[McFlavor], samples: usize, rng: &mut RngStream) -> CliResult<Vec<BoundReport>> {
    let zz = ising_from_graph(&Graph::unweighted(2, vec![(0, 1)])?)?;
    let random_h = random_ising(2, rng)?;
    let random_psi = random_state(2, rng)?;
    let cases: Vec<(&str, PauliString, ProblemHamiltonian, StateVector)> = vec![
        ("n=1,plus", "X".parse()?, z(), StateVector::from_label("+")?),
        ("n=2,plusplus", PauliString::single(2, 0, Pauli::X)?, zz, StateVector::from_label("++")?),
        ("n=2,random", PauliString::single(2, 0, Pauli::X)?, random_h, random_psi),
    ];
    let mut out = Vec::new();
    for (ci, (label, h, hp, psi)) in cases.iter().enumerate() {
        for (fi, &flavor) in flavors.iter().enumerate() {
            let stream = rng.substream((ci * 16 + fi) as u64);
            let check = verify_two_design_bound_mc(h, hp, psi, samples, flavor, &stream)?;
            let fl = match flavor {
                McFlavor::Haar => "haar".to_string(),
                McFlavor::Clifford => "clifford".to_string(),
                McFlavor::Brickwork { layers } => format!("brickwork{layers}"),
            };
            let mut a = named(check.expected_improvement, format!("two_design_bound[{fl},{label}]"));
            a.details.insert("mean_gradient".into(), check.mean_gradient);
            a.details.insert("mean_gradient_stderr".into(), check.mean_gradient_stderr);
            out.push(a);
            out.push(named(check.second_moment, format!("second_moment_identity[{fl},{label}]")));
        }
    }
    Ok(out)
}

/// Pool-average bound on `{X, Y, Z}` at `|+>` and on the full 2-qubit pool
/// over random states.
pub fn pool_checks(states: usize, rng: &mut RngStream) -> CliResult<Vec<BoundReport>> {
    let xyz: Vec<PauliString> = ["X", "Y", "Z"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mut out = vec![named(pool_average_bound(&xyz, &StateVector::from_label("+")?, &z())?, "pool_bound[XYZ,plus]")];
    let full = weight_graded_pool(2)?;
    let (mut worst, mut violations) = (f64::INFINITY, 0usize);
    for _ in 0..states {
        let h = random_ising(2, rng)?;
        let rep = pool_average_bound(&full, &random_state(2, rng)?, &h)?;
        worst = worst.min(rep.margin);
        violations += usize::from(!rep.satisfied);
    }
    let mut rep = BoundReport::lower("pool_bound[full,n=2]", worst, 0.0, 1e-10);
    rep.sample_count = Some(states);
    rep.details.insert("violations".into(), violations as f64);
    out.push(rep);
    Ok(out)
}

/// Cooling gradient: Hilbert-Schmidt, closed-system and fast paths agree,
/// and match central differences, on random composites of 2 to 4 qubits.
pub fn cooling_gradient_checks(cases: usize, rng: &mut RngStream) -> CliResult<[BoundReport; 2]> {
    let (mut worst_paths, mut worst_fd) = (0.0f64, 0.0f64);
    for i in 0..cases {
        let (ns, na) = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)][i % 5];
        let n = ns + na;
        let psi = random_state(n, rng)?;
        let phi = random_state(n, rng)?;
        let mix = mix_pure(&psi, &phi, 0.3)?;
        let state = DilatedState::from_composite(ns, na, mix)?;
        let target = random_state(ns, rng)?;
        let dir = haar_direction(n, rng)?;
        let dense = dir.to_dense();
        let hs = cooling_gradient(&state, &target, &dense)?;
        let closed = cooling_gradient_closed(&state, &target, &dense)?;
        let fast = cooling_gradient_fast(&state, &target, &dir)?;
        worst_paths = worst_paths.max((hs - closed).abs()).max((hs - fast).abs());
        let h = 1e-5;
        let fd = (state.rotate(&dir, h)?.cost(&target)? - state.rotate(&dir, -h)?.cost(&target)?) / (2.0 * h);
        worst_fd = worst_fd.max((hs - fd).abs());
    }
    Ok([
        BoundReport::two_sided("cooling_gradient_path_agreement", worst_paths, 0.0, 1e-10),
        BoundReport::two_sided("cooling_gradient_finite_difference", worst_fd, 0.0, 1e-6),
    ])
}

/// `(1 - w)|a><a| + w|b><b|`.
fn mix_pure(a: &StateVector, b: &StateVector, w: f64) -> CliResult<DensityMatrix> {
    let ra = DensityMatrix::from_pure(a)?;
    let rb = DensityMatrix::from_pure(b)?;
    let m = ra.matrix() * raq_prep_core::C64::new(1.0 - w, 0.0) + rb.matrix() * raq_prep_core::C64::new(w, 0.0);
    Ok(DensityMatrix::new(a.n_qubits(), m)?)
}

/// The full suite, seeded from `seed`.
pub fn verify_suite(seed: u64) -> CliResult<Vec<BoundReport>> {
    let root = RngStream::new(seed, 0);
    let mut out = Vec::new();
    out.extend(gradient_checks(100, &mut root.substream(1))?);
    out.extend(lipschitz_checks(1000, &mut root.substream(2))?);
    out.extend(step_bound_checks(&[2, 4], 1000, seed)?);
    out.push(m_bound_check(20, 0.01, seed)?);
    out.extend(two_design_checks(&[McFlavor::Haar, McFlavor::Clifford], MC_SAMPLES, &mut root.substream(3))?);
    out.extend(pool_checks(20, &mut root.substream(4))?);
    out.extend(cooling_gradient_checks(20, &mut root.substream(5))?);
    Ok(out)
}

/// Fixed-width pass/fail table.
pub fn format_table(reports: &[BoundReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:<width$}  {:>14}  {:>14}  {:>10}  result\n", "check", "lhs", "rhs", "tolerance");
    for r in reports {
        let verdict = match (r.satisfied, r.conclusive) {
            (_, false) => "INCONCLUSIVE",
            (true, true) => "PASS",
            (false, true) => "FAIL",
        };
        s.push_str(&format!(
            "{:<width$}  {:>14.6e}  {:>14.6e}  {:>10.2e}  {verdict}\n",
            r.name, r.lhs, r.rhs, r.tolerance
        ));
    }
    s
}
