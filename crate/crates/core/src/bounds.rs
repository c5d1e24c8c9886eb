//! Executable forms of the convergence bounds: the Lipschitz constant, the
//! per-step improvement, the step-count bound, the 2-design expectation
//! bound with its second-moment identity, and the pool-average bound.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{gradient_exact, Direction, GradientMode, RunTrace, StepRecord};
use crate::hamiltonian::ProblemHamiltonian;
use crate::linalg::{PauliString, SpectralNorm, StateVector};
use crate::random::{two_design_circuit, DesignFlavor, HouseholderUnitary, RngStream, SampledUnitary, TwoDesignConfig};
use crate::{Error, Result};

/// One-sided 99% normal quantile.
pub const Z_99_ONE_SIDED: f64 = 2.326_347_874_040_841;
/// Width, in standard errors, of two-sided identity checks.
pub const IDENTITY_SIGMAS: f64 = 3.0;
/// Slack for exact (non-sampled) comparisons.
pub const EXACT_TOL: f64 = 1e-10;
/// Minimum sample count for Monte Carlo checks.
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `lhs >= rhs - tolerance`.
    Lower,
    /// `|lhs - rhs| <= tolerance`.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub satisfied: bool,
    /// `lhs - rhs`.
    pub margin: f64,
    /// False when the check could not be decided (e.g. the run never got
    /// within epsilon of the ground energy).
    pub conclusive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn lower(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: BoundKind::Lower,
            lhs,
            rhs,
            tolerance,
            satisfied: lhs >= rhs - tolerance,
            margin: lhs - rhs,
            conclusive: true,
            sample_count: None,
            confidence: None,
            details: BTreeMap::new(),
        }
    }

    pub fn two_sided(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            kind: BoundKind::TwoSided,
            satisfied: (lhs - rhs).abs() <= tolerance,
            ..Self::lower(name, lhs, rhs, tolerance)
        }
    }

    fn with_samples(mut self, n: usize, confidence: &str) -> Self {
        self.sample_count = Some(n);
        self.confidence = Some(confidence.to_string());
        self
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Passed and decidable.
    pub fn passed(&self) -> bool {
        self.satisfied && self.conclusive
    }
}

/// `L = 4 ||H_p|| ||H||^2`, the Lipschitz constant of `dJ/dtheta`.
pub fn lipschitz_constant<P: SpectralNorm + ?Sized>(h_p: &P, h: &PauliString) -> f64 {
    let hn = h.spectral_norm();
    4.0 * h_p.spectral_norm() * hn * hn
}

/// Largest sampled difference quotient `|J'(x) - J'(y)| / |x - y|` of the
/// cost along `direction` from `state`, with `x, y` uniform on `[-pi, pi]`,
/// compared against `lipschitz`.
pub fn lipschitz_empirical(
    h_p: &ProblemHamiltonian,
    direction: &Direction,
    state: &StateVector,
    lipschitz: f64,
    pairs: usize,
    rng: &mut RngStream,
) -> Result<BoundReport> {
    let slope = |theta: f64| -> Result<f64> { gradient_exact(&direction.rotate(state, theta)?, direction, h_p) };
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x = rng.random_range(-PI..PI);
        let y = rng.random_range(-PI..PI);
        if x == y {
            continue;
        }
        worst = worst.max((slope(x)? - slope(y)?).abs() / (x - y).abs());
    }
    Ok(BoundReport::lower("lipschitz", lipschitz, worst, EXACT_TOL).with_samples(pairs, "exhaustive over samples"))
}

/// Per-step improvement `Delta J >= g^2 / (8 ||H_p||)`.
pub fn check_step_bound(record: &StepRecord, h_p: &ProblemHamiltonian) -> Result<BoundReport> {
    if matches!(record.gradient_mode, GradientMode::Shots { .. }) {
        return Err(Error::InvalidInput("step bound needs exact gradients, not shot estimates".into()));
    }
    let rhs = record.gradient * record.gradient / (8.0 * h_p.spectral_norm());
    Ok(BoundReport::lower("step_bound", record.delta_j, rhs, EXACT_TOL).detail("k", record.k as f64))
}

/// The step bound over every record of a trace. `lhs` is the worst margin
/// `Delta J - g^2 / (8 ||H_p||)`; `details.violations` counts failures.
pub fn check_trace_step_bounds(trace: &RunTrace, h_p: &ProblemHamiltonian) -> Result<BoundReport> {
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for r in &trace.records {
        let rep = check_step_bound(r, h_p)?;
        worst = worst.min(rep.margin);
        violations += usize::from(!rep.satisfied);
    }
    if trace.records.is_empty() {
        worst = 0.0;
    }
    Ok(BoundReport::lower("step_bound_trace", worst, 0.0, EXACT_TOL)
        .with_samples(trace.records.len(), "every step")
        .detail("violations", violations as f64))
}

/// Step-count bound `M <= C_eps / min_k g_k^2` with
/// `C_eps = 8 ||H_p|| (J_0 - (E_min + eps))`.
///
/// `M` is the first step count with `J_M <= E_min + eps`; the minimum runs
/// over the gradients of the steps taken before that point. `lhs` is the
/// bound and `rhs` the observed `M`.
pub fn m_upper_bound(trace: &RunTrace, h_p: &ProblemHamiltonian, epsilon: f64) -> BoundReport {
    const REACH_TOL: f64 = 1e-12;
    let target = trace.e_min + epsilon;
    let c_eps = 8.0 * h_p.spectral_norm() * (trace.j_initial - target);
    let reached = trace.j_sequence().iter().position(|&j| j <= target + REACH_TOL);
    let mut report = match reached {
        None => {
            let mut r = BoundReport::lower("m_bound", f64::NAN, trace.records.len() as f64, 0.0);
            r.satisfied = false;
            r.conclusive = false;
            r
        }
        Some(m) => {
            let min_g2 = trace.records[..m]
                .iter()
                .map(|r| r.gradient * r.gradient)
                .fold(f64::INFINITY, f64::min);
            let bound = if m == 0 { f64::INFINITY } else { c_eps / min_g2 };
            let mut r = BoundReport::lower("m_bound", bound, m as f64, 0.0);
            // A zero minimum gradient makes the bound vacuous.
            r.conclusive = m > 0 && min_g2 > 0.0;
            if m > 0 {
                r = r.detail("min_gradient_sq", min_g2);
            }
            r
        }
    };
    report = report.detail("epsilon", epsilon).detail("c_epsilon", c_eps);
    report
}

fn check_unit_traceless(h: &PauliString) -> Result<()> {
    if h.is_identity() {
        return Err(Error::InvalidInput(alloc::format!("{h} is not traceless")));
    }
    if (h.spectral_norm() - 1.0).abs() > EXACT_TOL {
        return Err(Error::InvalidInput(alloc::format!("{h} must have unit spectral norm")));
    }
    Ok(())
}

/// 2-design bound on the expected improvement:
/// `Tr{H^2} Var_psi(H_p) / (4 ||H_p|| (4^n - 1))`.
pub fn two_design_expected_bound(h: &PauliString, h_p: &ProblemHamiltonian, state: &StateVector) -> Result<f64> {
    check_unit_traceless(h)?;
    let n = state.n_qubits();
    let var = h_p.variance_of(state)?.max(0.0);
    let d2 = (1u64 << (2 * n)) as f64;
    Ok(tr_h_squared(h) * var / (4.0 * h_p.spectral_norm() * (d2 - 1.0)))
}

/// Haar (and 2-design) second moment of the gradient:
/// `E g^2 = 2 Tr{H^2} Var_psi(H_p) / (d^2 - 1)`.
pub fn second_moment_identity(h: &PauliString, h_p: &ProblemHamiltonian, state: &StateVector) -> Result<f64> {
    check_unit_traceless(h)?;
    let n = state.n_qubits();
    let var = h_p.variance_of(state)?.max(0.0);
    let d2 = (1u64 << (2 * n)) as f64;
    Ok(2.0 * tr_h_squared(h) * var / (d2 - 1.0))
}

fn tr_h_squared(h: &PauliString) -> f64 {
    h.coefficient() * h.coefficient() * (1u64 << h.n_qubits()) as f64
}

/// Ensemble the conjugating unitary is drawn from in Monte Carlo checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McFlavor {
    Haar,
    Clifford,
    Brickwork { layers: usize },
}

impl McFlavor {
    fn sample(self, n: usize, rng: &mut RngStream) -> Result<(SampledUnitary, &'static str)> {
        Ok(match self {
            McFlavor::Haar => (SampledUnitary::Haar(HouseholderUnitary::sample(n, rng)?), "haar"),
            McFlavor::Clifford => (
                SampledUnitary::Circuit(two_design_circuit(n, &TwoDesignConfig { flavor: DesignFlavor::Clifford, layers: 1 }, rng)?),
                "clifford",
            ),
            McFlavor::Brickwork { layers } => (
                SampledUnitary::Circuit(two_design_circuit(n, &TwoDesignConfig { flavor: DesignFlavor::Brickwork, layers }, rng)?),
                "brickwork",
            ),
        })
    }
}

/// Both halves of the Monte Carlo 2-design check, plus the measured mean
/// gradient (zero in expectation for exact designs; reported as bias).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoDesignCheck {
    pub expected_improvement: BoundReport,
    pub second_moment: BoundReport,
    pub mean_gradient: f64,
    pub mean_gradient_stderr: f64,
}

impl TwoDesignCheck {
    pub fn passed(&self) -> bool {
        self.expected_improvement.passed() && self.second_moment.passed()
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample `H_k = V^† H V` and check (a) the mean improvement of one
/// auto-gamma step against the 2-design bound, one-sided at 99%, and
/// (b) the mean squared gradient against the second-moment identity
/// within three standard errors. Sample `i` draws from `rng.substream(i)`.
pub fn verify_two_design_bound_mc(
    h: &PauliString,
    h_p: &ProblemHamiltonian,
    state: &StateVector,
    samples: usize,
    flavor: McFlavor,
    rng: &RngStream,
) -> Result<TwoDesignCheck> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidInput(alloc::format!("need at least {MIN_MC_SAMPLES} samples")));
    }
    let n = state.n_qubits();
    let bound = two_design_expected_bound(h, h_p, state)?;
    let identity = second_moment_identity(h, h_p, state)?;
    let gamma = 1.0 / (4.0 * h_p.spectral_norm());
    let j0 = h_p.energy(state)?;

    let mut deltas = Vec::with_capacity(samples);
    let mut g2 = Vec::with_capacity(samples);
    let mut gs = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut r = rng.substream(i as u64);
        let (unitary, label) = flavor.sample(n, &mut r)?;
        let dir = Direction::Conjugated { generator: h.clone(), unitary, label };
        let g = gradient_exact(state, &dir, h_p)?;
        let j1 = h_p.energy(&dir.rotate(state, -gamma * g)?)?;
        deltas.push(j0 - j1);
        g2.push(g * g);
        gs.push(g);
    }
    let (mean_dj, se_dj) = mean_and_stderr(&deltas);
    let (mean_g2, se_g2) = mean_and_stderr(&g2);
    let (mean_g, se_g) = mean_and_stderr(&gs);
    let conf = alloc::format!("{flavor:?}");
    Ok(TwoDesignCheck {
        expected_improvement: BoundReport::lower("two_design_expected_improvement", mean_dj, bound, Z_99_ONE_SIDED * se_dj + EXACT_TOL)
            .with_samples(samples, &alloc::format!("one-sided 99%, {conf}"))
            .detail("stderr", se_dj),
        second_moment: BoundReport::two_sided("second_moment_identity", mean_g2, identity, IDENTITY_SIGMAS * se_g2 + EXACT_TOL)
            .with_samples(samples, &alloc::format!("two-sided 3 sigma, {conf}"))
            .detail("stderr", se_g2),
        mean_gradient: mean_g,
        mean_gradient_stderr: se_g,
    })
}

/// Pool-average bound by exact enumeration:
/// `mean_A Delta J >= sum_A g^2 / (8 ||H_p|| |A|)`, each element stepped
/// with `theta = -g / (4 ||H_p||)`.
pub fn pool_average_bound(pool: &[PauliString], state: &StateVector, h_p: &ProblemHamiltonian) -> Result<BoundReport> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let norm = h_p.spectral_norm();
    let gamma = 1.0 / (4.0 * norm);
    let j0 = h_p.energy(state)?;
    let (mut sum_dj, mut sum_g2, mut max_g) = (0.0, 0.0, 0.0f64);
    for p in pool {
        let dir = Direction::Pauli(p.clone());
        let g = gradient_exact(state, &dir, h_p)?;
        let j1 = h_p.energy(&dir.rotate(state, -gamma * g)?)?;
        sum_dj += j0 - j1;
        sum_g2 += g * g;
        max_g = max_g.max(g.abs());
    }
    let size = pool.len() as f64;
    Ok(BoundReport::lower("pool_average", sum_dj / size, sum_g2 / (8.0 * norm * size), EXACT_TOL)
        .with_samples(pool.len(), "exact enumeration")
        .detail("max_abs_gradient", max_g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, step_with_direction, RandomizationStrategy, RunConfig};
    use crate::hamiltonian::{ising_from_graph, Graph};
    use crate::linalg::{weight_graded_pool, Pauli};
    use crate::random::random_state;

    fn z() -> ProblemHamiltonian {
        ProblemHamiltonian::from_diagonal(1, alloc::vec![1.0, -1.0]).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::from_label("+").unwrap()
    }

    #[test]
    fn lipschitz_values() {
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(lipschitz_constant(&z(), &x), 4.0);
        let k4 = ising_from_graph(&Graph::complete(4).unwrap()).unwrap();
        assert_eq!(lipschitz_constant(&k4, &PauliString::single(4, 0, Pauli::X).unwrap()), 24.0);
        let mut rng = RngStream::new(2, 0);
        let psi = random_state(1, &mut rng).unwrap();
        let rep = lipschitz_empirical(&z(), &Direction::Pauli(x), &psi, 4.0, 1000, &mut rng).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn step_bound_on_forced_step() {
        let cfg = RunConfig::new(z(), RandomizationStrategy::Pool { pool: alloc::vec!["Y".parse().unwrap()] });
        let mut rng = RngStream::new(0, 0);
        let (_, rec) = step_with_direction(&plus(), &cfg, &Direction::Pauli("Y".parse().unwrap()), &mut rng, 0).unwrap();
        let rep = check_step_bound(&rec, &z()).unwrap();
        assert!((rep.lhs - 1f64.sin()).abs() < 1e-12);
        assert!((rep.rhs - 0.5).abs() < 1e-12);
        assert!(rep.passed());

        let mut shot = rec.clone();
        shot.gradient_mode = GradientMode::Shots { shots: 10 };
        assert!(check_step_bound(&shot, &z()).is_err());
    }

    #[test]
    fn m_bound_single_step() {
        let mut cfg = RunConfig::new(z(), RandomizationStrategy::Pool { pool: alloc::vec!["Y".parse().unwrap()] });
        cfg.initial_state = Some(plus());
        cfg.max_steps = 1;
        let trace = run(&cfg, 0).unwrap();
        let eps = 1.0 - 1f64.sin();
        let rep = m_upper_bound(&trace, &z(), eps);
        assert_eq!(rep.rhs, 1.0);
        assert!((rep.details["c_epsilon"] - 8.0 * 1f64.sin()).abs() < 1e-12);
        assert!((rep.lhs - 2.0 * 1f64.sin()).abs() < 1e-12);
        assert!(rep.passed());
    }

    #[test]
    fn m_bound_inconclusive_without_progress() {
        let mut cfg = RunConfig::new(z(), RandomizationStrategy::Pool { pool: alloc::vec!["Z".parse().unwrap()] });
        cfg.initial_state = Some(plus());
        cfg.max_steps = 10;
        let trace = run(&cfg, 0).unwrap();
        let rep = m_upper_bound(&trace, &z(), 0.01);
        assert!(!rep.conclusive);
        assert!(!rep.passed());
    }

    #[test]
    fn two_design_bound_values() {
        let x: PauliString = "X".parse().unwrap();
        assert!((two_design_expected_bound(&x, &z(), &plus()).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((second_moment_identity(&x, &z(), &plus()).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(two_design_expected_bound(&x, &z(), &zero).unwrap(), 0.0);

        let zz = ising_from_graph(&Graph::unweighted(2, alloc::vec![(0, 1)]).unwrap()).unwrap();
        let x1 = PauliString::single(2, 0, Pauli::X).unwrap();
        let pp = StateVector::from_label("++").unwrap();
        assert!((two_design_expected_bound(&x1, &zz, &pp).unwrap() - 1.0 / 15.0).abs() < 1e-15);

        assert!(two_design_expected_bound(&"I".parse().unwrap(), &z(), &plus()).is_err());
        let half = PauliString::with_coefficient(alloc::vec![Pauli::X], 0.5).unwrap();
        assert!(two_design_expected_bound(&half, &z(), &plus()).is_err());
    }

    #[test]
    fn monte_carlo_check_small_case() {
        let x: PauliString = "X".parse().unwrap();
        let rng = RngStream::new(10, 0);
        for flavor in [McFlavor::Haar, McFlavor::Clifford] {
            let check = verify_two_design_bound_mc(&x, &z(), &plus(), 4000, flavor, &rng).unwrap();
            assert!(check.passed(), "{check:?}");
        }
        let zero = StateVector::zero(1).unwrap();
        let check = verify_two_design_bound_mc(&x, &z(), &zero, 1000, McFlavor::Haar, &rng).unwrap();
        assert!(check.second_moment.lhs.abs() < 1e-20);
        assert!(verify_two_design_bound_mc(&x, &z(), &plus(), 10, McFlavor::Haar, &rng).is_err());
    }

    #[test]
    fn pool_bound_xyz() {
        let pool: Vec<PauliString> = ["X", "Y", "Z"].iter().map(|s| s.parse().unwrap()).collect();
        let rep = pool_average_bound(&pool, &plus(), &z()).unwrap();
        assert!((rep.lhs - 1f64.sin() / 3.0).abs() < 1e-12);
        assert!((rep.rhs - 1.0 / 6.0).abs() < 1e-12);
        assert!(rep.passed());

        let rep = pool_average_bound(&["Z".parse().unwrap()], &plus(), &z()).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
        assert!(rep.passed());

        let zz = ising_from_graph(&Graph::unweighted(2, alloc::vec![(0, 1)]).unwrap()).unwrap();
        let full = weight_graded_pool(2).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..5 {
            let psi = random_state(2, &mut rng).unwrap();
            assert!(pool_average_bound(&full, &psi, &zz).unwrap().passed());
        }
    }
}
