use alloc::vec::Vec;

use super::{
    gradient_finite_difference, gradient_shot_estimate, CircuitEntry, Direction, GradientMode,
    RunConfig, RunTrace, StepRecord, StopRule, DIRECTION_STREAM, INIT_STREAM,
};
use crate::linalg::{inner, Observable, StateVector};
use crate::random::{random_state, RngStream};
use crate::{Error, Result};

/// Outcome of a run whose step records went to an observer.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: StateVector,
    pub j_initial: f64,
    pub final_j: f64,
    pub final_merit: f64,
    pub steps_taken: usize,
    pub stopped_early: bool,
    pub circuit: Option<Vec<CircuitEntry>>,
}

/// One adaptive step: sample `H_k`, measure the gradient, rotate.
pub fn step(
    state: &StateVector,
    cfg: &RunConfig,
    rng: &mut RngStream,
    k: usize,
) -> Result<(StateVector, StepRecord)> {
    let direction = Direction::sample(&cfg.strategy, cfg.n_qubits(), rng)?;
    step_with_direction(state, cfg, &direction, rng, k)
}

/// A step along a given direction. `rng` is only drawn from in shot mode.
pub fn step_with_direction(
    state: &StateVector,
    cfg: &RunConfig,
    direction: &Direction,
    rng: &mut RngStream,
    k: usize,
) -> Result<(StateVector, StepRecord)> {
    let h_p = &cfg.hamiltonian;
    let n = h_p.n_qubits();
    state.check_same(n)?;
    if direction.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: direction.n_qubits() });
    }
    let gamma = cfg.gamma.resolve(h_p)?;
    let j_before = h_p.energy_of(state.amplitudes());
    let involutory = direction.is_involutory();

    let mut psi = state.clone();
    let mut first_gradient = None;
    let mut theta_total = 0.0;
    for _ in 0..cfg.repeats.max(1) {
        let (gradient, next) = match cfg.gradient_mode {
            GradientMode::Exact => {
                let amps = psi.amplitudes();
                let hk_psi = direction.apply(amps);
                let hp_psi = h_p.apply(amps);
                let g = -2.0 * inner(&hk_psi, &hp_psi).im;
                let theta = -gamma * g;
                let next = if involutory {
                    StateVector::from_raw(n, Direction::rotate_with(amps, &hk_psi, theta))
                } else {
                    direction.rotate(&psi, theta)?
                };
                (g, next)
            }
            GradientMode::FiniteDifference { h } => {
                let g = gradient_finite_difference(&psi, direction, h_p, h)?;
                (g, direction.rotate(&psi, -gamma * g)?)
            }
            GradientMode::Shots { shots } => {
                let g = gradient_shot_estimate(&psi, direction, h_p, shots, rng)?;
                (g, direction.rotate(&psi, -gamma * g)?)
            }
        };
        first_gradient.get_or_insert(gradient);
        theta_total += -gamma * gradient;
        psi = next;
    }

    let j_after = h_p.energy_of(psi.amplitudes());
    let record = StepRecord {
        k,
        gradient: first_gradient.unwrap_or(0.0),
        theta: theta_total,
        j_before,
        j_after,
        delta_j: j_before - j_after,
        strategy: cfg.strategy.kind(),
        direction: direction.describe(),
        stream_id: rng.stream_id(),
        gradient_mode: cfg.gradient_mode,
        purity: None,
        fidelity: None,
    };
    Ok((psi, record))
}

/// Initial state of trial `trial`: the configured one, or Haar-random from
/// the trial's init substream. Strategies sharing a seed share this state.
pub fn initial_state(cfg: &RunConfig, trial: u64) -> Result<StateVector> {
    match &cfg.initial_state {
        Some(s) => Ok(s.clone()),
        None => random_state(cfg.n_qubits(), &mut RngStream::new(cfg.seed, trial).substream(INIT_STREAM)),
    }
}

/// Run trial `trial`, handing every record to `observe` instead of storing it.
pub fn run_observed<F>(cfg: &RunConfig, trial: u64, mut observe: F) -> Result<RunSummary>
where
    F: FnMut(&StepRecord),
{
    cfg.validate()?;
    let h_p = &cfg.hamiltonian;
    let mut psi = initial_state(cfg, trial)?;
    let mut rng = RngStream::new(cfg.seed, trial).substream(DIRECTION_STREAM);
    let j_initial = h_p.energy_of(psi.amplitudes());
    let mut final_j = j_initial;
    let mut circuit = cfg.record_circuit.then(Vec::new);
    let mut quiet = 0usize;
    let mut stopped_early = false;
    let mut steps_taken = 0;

    for k in 0..cfg.max_steps {
        let direction = Direction::sample(&cfg.strategy, cfg.n_qubits(), &mut rng)?;
        let (next, mut record) = step_with_direction(&psi, cfg, &direction, &mut rng, k)?;
        // Records carry the trial id, not the derived substream id.
        record.stream_id = trial;
        if let Some(c) = circuit.as_mut() {
            c.push(CircuitEntry { direction: record.direction.clone(), theta: record.theta });
        }
        observe(&record);
        psi = next;
        final_j = record.j_after;
        steps_taken = k + 1;
        let stop = match cfg.stop {
            StopRule::None => false,
            StopRule::AlphaThreshold(t) => h_p.figure_of_merit(final_j) >= t,
            StopRule::GradientPatience { tol, patience } => {
                quiet = if record.gradient.abs() < tol { quiet + 1 } else { 0 };
                quiet >= patience
            }
        };
        if stop {
            stopped_early = steps_taken < cfg.max_steps;
            break;
        }
    }

    Ok(RunSummary {
        final_state: psi,
        j_initial,
        final_j,
        final_merit: h_p.figure_of_merit(final_j),
        steps_taken,
        stopped_early,
        circuit,
    })
}

/// Run trial `trial` and keep the full trace.
pub fn run(cfg: &RunConfig, trial: u64) -> Result<RunTrace> {
    let mut records = Vec::with_capacity(cfg.max_steps.min(1 << 16));
    let summary = run_observed(cfg, trial, |r| records.push(r.clone()))?;
    Ok(RunTrace {
        n_qubits: cfg.n_qubits(),
        seed: cfg.seed,
        stream_id: trial,
        strategy: cfg.strategy.kind(),
        gamma: cfg.gamma.resolve(&cfg.hamiltonian)?,
        max_steps: cfg.max_steps,
        stop: cfg.stop,
        gradient_mode: cfg.gradient_mode,
        e_min: cfg.hamiltonian.ground_energy(),
        j_initial: summary.j_initial,
        records,
        final_j: summary.final_j,
        final_merit: summary.final_merit,
        stopped_early: summary.stopped_early,
        circuit: summary.circuit,
        wall_time_s: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Gamma, RandomizationStrategy};
    use crate::hamiltonian::{ising_from_graph, projector_hamiltonian, Graph, ProblemHamiltonian};
    use crate::linalg::{weight_graded_pool, Pauli, PauliString, SpectralNorm};
    use crate::random::TwoDesignConfig;

    fn z() -> ProblemHamiltonian {
        ProblemHamiltonian::from_diagonal(1, alloc::vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn forced_y_step_on_plus() {
        let cfg = RunConfig::new(z(), RandomizationStrategy::Pool { pool: alloc::vec!["Y".parse().unwrap()] });
        let psi = StateVector::from_label("+").unwrap();
        let dir = Direction::Pauli("Y".parse().unwrap());
        let mut rng = RngStream::new(0, 0);
        let (_, rec) = step_with_direction(&psi, &cfg, &dir, &mut rng, 0).unwrap();
        assert!((rec.gradient + 2.0).abs() < 1e-12);
        assert!((rec.theta - 0.5).abs() < 1e-12);
        assert!(rec.j_before.abs() < 1e-12);
        assert!((rec.j_after + 1f64.sin()).abs() < 1e-12);
        assert!(rec.delta_j >= rec.gradient * rec.gradient / 8.0);
    }

    #[test]
    fn zero_gradient_step_leaves_state() {
        let cfg = RunConfig::new(z(), RandomizationStrategy::Pool { pool: alloc::vec!["Z".parse().unwrap()] });
        let psi = StateVector::from_label("+").unwrap();
        let mut rng = RngStream::new(0, 0);
        let (next, rec) = step(&psi, &cfg, &mut rng, 0).unwrap();
        assert_eq!(rec.theta, 0.0);
        assert_eq!(rec.delta_j, 0.0);
        assert_eq!(next, psi);
    }

    #[test]
    fn exact_steps_are_monotone_and_obey_step_bound() {
        let h = ising_from_graph(&Graph::complete(4).unwrap()).unwrap();
        let norm = h.spectral_norm();
        let gen = PauliString::single(4, 0, Pauli::X).unwrap();
        for strategy in [
            RandomizationStrategy::Haar { generator: gen.clone() },
            RandomizationStrategy::TwoDesign { generator: gen.clone(), design: TwoDesignConfig::default() },
            RandomizationStrategy::Pool { pool: weight_graded_pool(4).unwrap() },
        ] {
            let mut cfg = RunConfig::new(h.clone(), strategy);
            cfg.max_steps = 300;
            let trace = run(&cfg, 0).unwrap();
            assert_eq!(trace.records.len(), 300);
            for r in &trace.records {
                assert!((r.delta_j - (r.j_before - r.j_after)).abs() < 1e-12);
                assert!((r.theta + r.gradient / (4.0 * norm)).abs() < 1e-12);
                assert!(r.delta_j >= r.gradient * r.gradient / (8.0 * norm) - 1e-10);
            }
        }
    }

    #[test]
    fn projector_target_is_stationary() {
        let target = StateVector::from_label("+0").unwrap();
        let mut cfg = RunConfig::new(
            projector_hamiltonian(&target).unwrap(),
            RandomizationStrategy::Haar { generator: RandomizationStrategy::default_generator(2).unwrap() },
        );
        cfg.initial_state = Some(target);
        cfg.max_steps = 5;
        let trace = run(&cfg, 0).unwrap();
        assert!(trace.records[0].gradient.abs() < 1e-12);
        assert!(trace.final_j.abs() < 1e-12);
    }

    #[test]
    fn runs_are_deterministic_and_trials_differ() {
        let h = ising_from_graph(&Graph::unweighted(2, alloc::vec![(0, 1)]).unwrap()).unwrap();
        let mut cfg = RunConfig::new(
            h,
            RandomizationStrategy::Haar { generator: RandomizationStrategy::default_generator(2).unwrap() },
        );
        cfg.max_steps = 50;
        assert_eq!(run(&cfg, 3).unwrap(), run(&cfg, 3).unwrap());
        assert_ne!(run(&cfg, 3).unwrap().j_initial, run(&cfg, 4).unwrap().j_initial);
    }

    #[test]
    fn alpha_threshold_stops_early() {
        let h = ising_from_graph(&Graph::unweighted(2, alloc::vec![(0, 1)]).unwrap()).unwrap();
        let mut cfg = RunConfig::new(
            h,
            RandomizationStrategy::Haar { generator: RandomizationStrategy::default_generator(2).unwrap() },
        );
        cfg.max_steps = 5000;
        cfg.stop = StopRule::AlphaThreshold(0.9);
        cfg.record_circuit = true;
        let trace = run(&cfg, 0).unwrap();
        assert!(trace.stopped_early);
        assert!(trace.final_merit >= 0.9);
        assert_eq!(trace.circuit.as_ref().unwrap().len(), trace.records.len());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = RunConfig::new(z(), RandomizationStrategy::Pool { pool: alloc::vec![] });
        assert!(matches!(run(&cfg, 0), Err(Error::EmptyPool)));
        cfg.strategy = RandomizationStrategy::Haar { generator: "I".parse().unwrap() };
        assert!(run(&cfg, 0).is_err());
        cfg.strategy = RandomizationStrategy::Haar { generator: "X".parse().unwrap() };
        cfg.gamma = Gamma::Fixed(-1.0);
        assert!(run(&cfg, 0).is_err());
        cfg.gamma = Gamma::Auto;
        cfg.max_steps = 0;
        assert!(run(&cfg, 0).is_err());
    }
}
