//! Mixed-state preparation by dilation: the system is paired with ancilla
//! qubits in `|0...0>`, the composite evolves unitarily, and the cost is the
//! target infidelity of the reduced system state.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use rand_distr::{Binomial, Distribution};

use crate::engine::{
    CircuitEntry, Direction, Gamma, GradientMode, RandomizationStrategy, RunTrace, StepRecord,
    StopRule, DIRECTION_STREAM,
};
use crate::linalg::{expm_hermitian, inner, DenseOperator, DensityMatrix, Observable, StateVector};
use crate::random::{HouseholderUnitary, RngStream};
use crate::{check_qubit_cap, Error, Result, C64, MAX_DENSITY_QUBITS};

/// Substream tag for the randomizing kick.
pub const KICK_STREAM: u64 = 2;
/// Below this Frobenius norm of `[rho_0, P_T ⊗ 1]` the initial state is
/// treated as commuting with the target.
pub const COMMUTING_TOL: f64 = 1e-12;

/// System (leading qubits) plus ancilla register.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedState {
    n_system: usize,
    n_ancilla: usize,
    rho: DensityMatrix,
}

impl DilatedState {
    /// `rho_S ⊗ |0...0><0...0|_A`.
    pub fn new(rho_system: &DensityMatrix, n_ancilla: usize) -> Result<Self> {
        let n_system = rho_system.n_qubits();
        check_qubit_cap(n_system + n_ancilla, MAX_DENSITY_QUBITS)?;
        let rho = if n_ancilla == 0 {
            rho_system.clone()
        } else {
            let ancilla = DensityMatrix::from_pure(&StateVector::zero(n_ancilla)?)?;
            rho_system.kron(&ancilla)?
        };
        Ok(Self { n_system, n_ancilla, rho })
    }

    pub fn from_composite(n_system: usize, n_ancilla: usize, rho: DensityMatrix) -> Result<Self> {
        if rho.n_qubits() != n_system + n_ancilla || n_system == 0 {
            return Err(Error::DimensionMismatch { expected: n_system + n_ancilla, found: rho.n_qubits() });
        }
        Ok(Self { n_system, n_ancilla, rho })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system + self.n_ancilla
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// Reduced system state.
    pub fn system(&self) -> DensityMatrix {
        let keep: Vec<usize> = (0..self.n_system).collect();
        self.rho.partial_trace(&keep).expect("system qubits are a valid keep set")
    }

    fn check_target(&self, target: &StateVector) -> Result<()> {
        if target.n_qubits() != self.n_system {
            return Err(Error::DimensionMismatch { expected: self.n_system, found: target.n_qubits() });
        }
        Ok(())
    }

    /// `|t> ⊗ |a>` for every ancilla basis state `a`.
    fn projector_vectors(&self, target: &StateVector) -> Vec<Vec<C64>> {
        let d_a = 1usize << self.n_ancilla;
        let t = target.amplitudes();
        (0..d_a)
            .map(|a| {
                let mut v = alloc::vec![C64::new(0.0, 0.0); t.len() * d_a];
                for (s, amp) in t.iter().enumerate() {
                    v[s * d_a + a] = *amp;
                }
                v
            })
            .collect()
    }

    /// `Tr[rho (|t><t| ⊗ 1)] = <t|rho_S|t>`.
    pub fn fidelity(&self, target: &StateVector) -> Result<f64> {
        self.check_target(target)?;
        Ok(fidelity_of(self.rho.matrix(), &self.projector_vectors(target)))
    }

    /// `J = 1 - <t|rho_S|t>`.
    pub fn cost(&self, target: &StateVector) -> Result<f64> {
        Ok(1.0 - self.fidelity(target)?)
    }

    /// Dense `|t><t| ⊗ 1_A`.
    pub fn target_projector(&self, target: &StateVector) -> Result<DMatrix<C64>> {
        self.check_target(target)?;
        let d = self.rho.dim();
        let mut p = DMatrix::zeros(d, d);
        for v in self.projector_vectors(target) {
            for i in 0..d {
                for j in 0..d {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Ok(p)
    }

    /// `exp(-i theta H) rho exp(i theta H)`.
    pub fn rotate(&self, direction: &Direction, theta: f64) -> Result<Self> {
        if direction.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch { expected: self.n_qubits(), found: direction.n_qubits() });
        }
        let m = self.rho.matrix();
        let rotated = if direction.is_involutory() {
            // (c - isH) rho (c + isH) = c^2 rho + s^2 H rho H + ics (rho H - H rho)
            let h_rho = apply_columns(direction, m);
            let rho_h = h_rho.adjoint();
            let h_rho_h = apply_columns(direction, &rho_h);
            let (s, c) = theta.sin_cos();
            let ics = C64::new(0.0, c * s);
            m * C64::new(c * c, 0.0) + h_rho_h * C64::new(s * s, 0.0) + (rho_h - h_rho) * ics
        } else {
            let u = expm_hermitian(&direction.to_dense(), theta)?;
            u.matrix() * m * u.matrix().adjoint()
        };
        Ok(Self { n_system: self.n_system, n_ancilla: self.n_ancilla, rho: DensityMatrix::from_raw(self.n_qubits(), rotated) })
    }

    fn conjugate_dense(&self, u: &DMatrix<C64>) -> Self {
        let m = u * self.rho.matrix() * u.adjoint();
        Self { n_system: self.n_system, n_ancilla: self.n_ancilla, rho: DensityMatrix::from_raw(self.n_qubits(), m) }
    }
}

fn fidelity_of(m: &DMatrix<C64>, vectors: &[Vec<C64>]) -> f64 {
    vectors
        .iter()
        .map(|v| {
            let rv = matvec(m, v);
            inner(v, &rv).re
        })
        .sum()
}

fn matvec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let d = v.len();
    let mut out = alloc::vec![C64::new(0.0, 0.0); d];
    for (j, vj) in v.iter().enumerate() {
        if *vj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = &m.as_slice()[j * d..(j + 1) * d];
        for (o, x) in out.iter_mut().zip(col) {
            *o += x * vj;
        }
    }
    out
}

/// `H * M`, applying `H` column by column.
fn apply_columns<O: Observable + ?Sized>(h: &O, m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let col = &m.as_slice()[j * d..(j + 1) * d];
        h.apply_into(col, &mut out.as_mut_slice()[j * d..(j + 1) * d]);
    }
    out
}

fn check_direction_dims(state: &DilatedState, n: usize) -> Result<()> {
    if n != state.n_qubits() {
        return Err(Error::DimensionMismatch { expected: state.n_qubits(), found: n });
    }
    Ok(())
}

/// Cooling gradient as a Hilbert-Schmidt product:
/// `-<[rho, P_T ⊗ 1], i H_k>`.
pub fn cooling_gradient(state: &DilatedState, target: &StateVector, h_k: &DenseOperator) -> Result<f64> {
    check_direction_dims(state, h_k.n_qubits())?;
    let p = state.target_projector(target)?;
    let rho = state.rho.matrix();
    let comm = rho * &p - &p * rho;
    let ihk = h_k.matrix() * C64::new(0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in comm.iter().zip(ihk.iter()) {
        acc += a.conj() * b;
    }
    Ok(-acc.re)
}

/// The same gradient from the closed-system formula `i Tr(rho [H_k, H_p])`
/// with `H_p = 1 - P_T ⊗ 1` on the composite.
pub fn cooling_gradient_closed(state: &DilatedState, target: &StateVector, h_k: &DenseOperator) -> Result<f64> {
    check_direction_dims(state, h_k.n_qubits())?;
    let d = state.rho.dim();
    let h_p = DMatrix::<C64>::identity(d, d) - state.target_projector(target)?;
    let h = h_k.matrix();
    let comm = h * &h_p - &h_p * h;
    let tr = (state.rho.matrix() * comm).trace();
    Ok((C64::new(0.0, 1.0) * tr).re)
}

/// Fast path: `-2 Im Tr(P H_k rho) = -2 Im sum_a <H_k v_a|rho v_a>` with
/// `v_a = |t> ⊗ |a>`.
pub fn cooling_gradient_fast<O: Observable + ?Sized>(state: &DilatedState, target: &StateVector, h_k: &O) -> Result<f64> {
    check_direction_dims(state, h_k.n_qubits())?;
    state.check_target(target)?;
    let rho = state.rho.matrix();
    let mut acc = 0.0;
    for v in state.projector_vectors(target) {
        let hv = h_k.apply(&v);
        let rv = matvec(rho, &v);
        acc += inner(&hv, &rv).im;
    }
    Ok(-2.0 * acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickPolicy {
    /// Kick only when `rho_0` commutes with the target projector.
    #[default]
    Auto,
    Always,
    Never,
}

/// Configuration of a cooling run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingConfig {
    pub target: StateVector,
    pub n_ancilla: usize,
    /// Maximally mixed when `None`.
    pub rho0_system: Option<DensityMatrix>,
    /// Acts on the whole composite.
    pub strategy: RandomizationStrategy,
    pub gamma: Gamma,
    pub max_steps: usize,
    pub stop: StopRule,
    pub gradient_mode: GradientMode,
    pub seed: u64,
    pub trials: usize,
    pub kick: KickPolicy,
    pub record_circuit: bool,
}

impl CoolingConfig {
    /// Haar strategy with the default generator, auto gamma, exact gradients.
    pub fn new(target: StateVector, n_ancilla: usize) -> Result<Self> {
        let n = target.n_qubits() + n_ancilla;
        check_qubit_cap(n, MAX_DENSITY_QUBITS)?;
        Ok(Self {
            target,
            n_ancilla,
            rho0_system: None,
            strategy: RandomizationStrategy::Haar { generator: RandomizationStrategy::default_generator(n)? },
            gamma: Gamma::Auto,
            max_steps: 2000,
            stop: StopRule::None,
            gradient_mode: GradientMode::Exact,
            seed: 0,
            trials: 1,
            kick: KickPolicy::Auto,
            record_circuit: false,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.target.n_qubits() + self.n_ancilla
    }

    /// Auto gamma is `1/4`: the dilated cost has spectral norm 1.
    pub fn resolved_gamma(&self) -> Result<f64> {
        match self.gamma {
            Gamma::Auto => Ok(0.25),
            Gamma::Fixed(g) if g > 0.0 && g.is_finite() => Ok(g),
            Gamma::Fixed(g) => Err(Error::InvalidConfig(alloc::format!("gamma must be positive, got {g}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        check_qubit_cap(n, MAX_DENSITY_QUBITS)?;
        self.strategy.validate(n)?;
        self.resolved_gamma()?;
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let Some(r) = &self.rho0_system {
            if r.n_qubits() != self.target.n_qubits() {
                return Err(Error::DimensionMismatch { expected: self.target.n_qubits(), found: r.n_qubits() });
            }
        }
        match self.gradient_mode {
            GradientMode::FiniteDifference { h } if !(h > 0.0 && h.is_finite()) => {
                Err(Error::InvalidConfig("finite-difference step must be positive".into()))
            }
            GradientMode::Shots { shots: 0 } => Err(Error::InvalidConfig("shots must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// Initial composite of trial `trial`, after the kick if one applies.
/// Returns the state and whether it was kicked.
pub fn cooling_initial_state(cfg: &CoolingConfig, trial: u64) -> Result<(DilatedState, bool)> {
    let rho_s = match &cfg.rho0_system {
        Some(r) => r.clone(),
        None => DensityMatrix::maximally_mixed(cfg.target.n_qubits())?,
    };
    let state = DilatedState::new(&rho_s, cfg.n_ancilla)?;
    let kick = match cfg.kick {
        KickPolicy::Always => true,
        KickPolicy::Never => false,
        KickPolicy::Auto => {
            let p = state.target_projector(&cfg.target)?;
            let rho = state.rho.matrix();
            (rho * &p - &p * rho).norm() < COMMUTING_TOL
        }
    };
    if !kick {
        return Ok((state, false));
    }
    let mut rng = RngStream::new(cfg.seed, trial).substream(KICK_STREAM);
    let w = HouseholderUnitary::sample(state.n_qubits(), &mut rng)?.to_dense();
    Ok((state.conjugate_dense(w.matrix()), true))
}

fn shot_cost(state: &DilatedState, target: &StateVector, shots: u64, rng: &mut RngStream) -> Result<f64> {
    let p_excited = state.cost(target)?.clamp(0.0, 1.0);
    let hits = Binomial::new(shots, p_excited)
        .map_err(|e| Error::InvalidInput(alloc::format!("{e}")))?
        .sample(rng);
    Ok(hits as f64 / shots as f64)
}

/// Cool trial `trial` from `rho_0^S ⊗ |0><0|_A` towards the target.
/// Records carry the system purity and target fidelity after each step.
pub fn cooling_run(cfg: &CoolingConfig, trial: u64) -> Result<RunTrace> {
    cfg.validate()?;
    let gamma = cfg.resolved_gamma()?;
    let target = &cfg.target;
    let n = cfg.n_qubits();
    let (mut state, _) = cooling_initial_state(cfg, trial)?;
    let mut rng = RngStream::new(cfg.seed, trial).substream(DIRECTION_STREAM);
    let vectors = state.projector_vectors(target);
    let j_initial = 1.0 - fidelity_of(state.rho.matrix(), &vectors);
    let mut records = Vec::with_capacity(cfg.max_steps.min(1 << 16));
    let mut circuit = cfg.record_circuit.then(Vec::new);
    let mut quiet = 0usize;
    let mut stopped_early = false;
    let mut j = j_initial;

    for k in 0..cfg.max_steps {
        let direction = Direction::sample(&cfg.strategy, n, &mut rng)?;
        let gradient = match cfg.gradient_mode {
            GradientMode::Exact => cooling_gradient_fast(&state, target, &direction)?,
            GradientMode::FiniteDifference { h } => {
                let plus = state.rotate(&direction, h)?.cost(target)?;
                let minus = state.rotate(&direction, -h)?.cost(target)?;
                (plus - minus) / (2.0 * h)
            }
            GradientMode::Shots { shots } => {
                if !direction.is_involutory() {
                    return Err(Error::NotInvolutory);
                }
                let plus = shot_cost(&state.rotate(&direction, FRAC_PI_4)?, target, shots, &mut rng)?;
                let minus = shot_cost(&state.rotate(&direction, -FRAC_PI_4)?, target, shots, &mut rng)?;
                plus - minus
            }
        };
        let theta = -gamma * gradient;
        state = state.rotate(&direction, theta)?;
        let fidelity = fidelity_of(state.rho.matrix(), &vectors);
        let j_after = 1.0 - fidelity;
        let record = StepRecord {
            k,
            gradient,
            theta,
            j_before: j,
            j_after,
            delta_j: j - j_after,
            strategy: cfg.strategy.kind(),
            direction: direction.describe(),
            stream_id: trial,
            gradient_mode: cfg.gradient_mode,
            purity: Some(state.system().purity()),
            fidelity: Some(fidelity),
        };
        if let Some(c) = circuit.as_mut() {
            c.push(CircuitEntry { direction: record.direction.clone(), theta });
        }
        j = j_after;
        let stop = match cfg.stop {
            StopRule::None => false,
            StopRule::AlphaThreshold(t) => fidelity >= t,
            StopRule::GradientPatience { tol, patience } => {
                quiet = if gradient.abs() < tol { quiet + 1 } else { 0 };
                quiet >= patience
            }
        };
        records.push(record);
        if stop {
            stopped_early = k + 1 < cfg.max_steps;
            break;
        }
    }

    Ok(RunTrace {
        n_qubits: n,
        seed: cfg.seed,
        stream_id: trial,
        strategy: cfg.strategy.kind(),
        gamma,
        max_steps: cfg.max_steps,
        stop: cfg.stop,
        gradient_mode: cfg.gradient_mode,
        e_min: 0.0,
        j_initial,
        records,
        final_j: j,
        final_merit: 1.0 - j,
        stopped_early,
        circuit,
        wall_time_s: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Pauli, PauliString};
    use crate::random::{random_state, SampledUnitary};

    fn random_density(n: usize, rank: usize, rng: &mut RngStream) -> DensityMatrix {
        let d = 1usize << n;
        let mut m = DMatrix::<C64>::zeros(d, d);
        for _ in 0..rank {
            let psi = random_state(n, rng).unwrap();
            let a = psi.amplitudes();
            m += DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj()) * C64::new(1.0 / rank as f64, 0.0);
        }
        DensityMatrix::new(n, m).unwrap()
    }

    #[test]
    fn gradient_paths_agree() {
        let mut rng = RngStream::new(17, 0);
        for (ns, na) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)] {
            for _ in 0..5 {
                let rho = random_density(ns + na, 3, &mut rng);
                let state = DilatedState::from_composite(ns, na, rho).unwrap();
                let target = random_state(ns, &mut rng).unwrap();
                let dir = Direction::Conjugated {
                    generator: PauliString::single(ns + na, 0, Pauli::X).unwrap(),
                    unitary: SampledUnitary::Haar(HouseholderUnitary::sample(ns + na, &mut rng).unwrap()),
                    label: "haar",
                };
                let dense = dir.to_dense();
                let hs = cooling_gradient(&state, &target, &dense).unwrap();
                let closed = cooling_gradient_closed(&state, &target, &dense).unwrap();
                let fast = cooling_gradient_fast(&state, &target, &dir).unwrap();
                assert!((hs - closed).abs() < 1e-10, "{hs} {closed}");
                assert!((hs - fast).abs() < 1e-10, "{hs} {fast}");
                let h = 1e-5;
                let fd = (state.rotate(&dir, h).unwrap().cost(&target).unwrap()
                    - state.rotate(&dir, -h).unwrap().cost(&target).unwrap())
                    / (2.0 * h);
                assert!((hs - fd).abs() < 1e-6, "{hs} {fd}");
                let reduced = state.system().fidelity_with(&target).unwrap();
                assert!((reduced - state.fidelity(&target).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_points() {
        let target = StateVector::zero(1).unwrap();
        let optimum = DilatedState::new(&DensityMatrix::from_pure(&target).unwrap(), 1).unwrap();
        let mixed = DilatedState::from_composite(1, 1, DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        let mut rng = RngStream::new(1, 1);
        for _ in 0..5 {
            let w = HouseholderUnitary::sample(2, &mut rng).unwrap();
            let dir = Direction::Conjugated { generator: "XI".parse().unwrap(), unitary: SampledUnitary::Haar(w), label: "haar" };
            assert!(cooling_gradient_fast(&optimum, &target, &dir).unwrap().abs() < 1e-12);
            assert!(cooling_gradient_fast(&mixed, &target, &dir).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn plus_zero_against_finite_difference() {
        let rho = DensityMatrix::from_pure(&StateVector::from_label("+0").unwrap()).unwrap();
        let state = DilatedState::from_composite(1, 1, rho).unwrap();
        let target = StateVector::zero(1).unwrap();
        let dir = Direction::Pauli("YI".parse().unwrap());
        let g = cooling_gradient(&state, &target, &dir.to_dense()).unwrap();
        let h = 1e-5;
        let fd = (state.rotate(&dir, h).unwrap().cost(&target).unwrap()
            - state.rotate(&dir, -h).unwrap().cost(&target).unwrap())
            / (2.0 * h);
        assert!((g - fd).abs() < 1e-6);
        // J(theta) = (1 - cos(2 theta + pi/2)) / 2 around |+>, so J'(0) = 1.
        assert!((g - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_target_without_kick_is_stationary() {
        let target = StateVector::from_label("+").unwrap();
        let mut cfg = CoolingConfig::new(target.clone(), 1).unwrap();
        cfg.rho0_system = Some(DensityMatrix::from_pure(&target).unwrap());
        cfg.kick = KickPolicy::Never;
        cfg.max_steps = 20;
        let trace = cooling_run(&cfg, 0).unwrap();
        assert!(trace.records.iter().all(|r| r.j_after.abs() < 1e-12));
    }

    #[test]
    fn mixed_start_is_kicked_and_cools_monotonically() {
        let cfg = CoolingConfig::new(StateVector::zero(1).unwrap(), 1).unwrap();
        let (_, kicked) = cooling_initial_state(&cfg, 0).unwrap();
        assert!(kicked);
        let mut cfg = cfg;
        cfg.max_steps = 300;
        let trace = cooling_run(&cfg, 0).unwrap();
        assert!(trace.is_monotone(1e-12));
        assert!(trace.final_j < trace.j_initial);
        let last = trace.records.last().unwrap();
        assert!(last.purity.unwrap() > 0.5 - 1e-12);
    }

    #[test]
    fn composite_cap_enforced() {
        assert!(CoolingConfig::new(StateVector::zero(4).unwrap(), 7).is_err());
    }
}
