use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::hamiltonian::ProblemHamiltonian;
use crate::linalg::{Pauli, PauliString, SpectralNorm, StateVector};
use crate::random::TwoDesignConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Haar,
    TwoDesign,
    Pool,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Haar => "haar",
            StrategyKind::TwoDesign => "two_design",
            StrategyKind::Pool => "pool",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the direction `H_k` of each step is randomized.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomizationStrategy {
    /// `H_k = V^† H V` with Haar-random `V`.
    Haar { generator: PauliString },
    /// `H_k = V^† H V` with `V` from a unitary 2-design.
    TwoDesign {
        generator: PauliString,
        design: TwoDesignConfig,
    },
    /// `H_k` drawn uniformly from an ordered pool.
    Pool { pool: Vec<PauliString> },
}

impl RandomizationStrategy {
    /// `X` on qubit 0 tensored with identities.
    pub fn default_generator(n_qubits: usize) -> Result<PauliString> {
        PauliString::single(n_qubits, 0, Pauli::X)
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            RandomizationStrategy::Haar { .. } => StrategyKind::Haar,
            RandomizationStrategy::TwoDesign { .. } => StrategyKind::TwoDesign,
            RandomizationStrategy::Pool { .. } => StrategyKind::Pool,
        }
    }

    /// Generators must be traceless with unit spectral norm; pool elements
    /// too. Every operator must act on `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |p: &PauliString| -> Result<()> {
            if p.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    found: p.n_qubits(),
                });
            }
            if p.is_identity() {
                return Err(Error::InvalidConfig(alloc::format!(
                    "generator {p} is not traceless"
                )));
            }
            if p.coefficient() != 1.0 {
                return Err(Error::InvalidConfig(alloc::format!(
                    "generator {p} must have coefficient 1 (unit spectral norm)"
                )));
            }
            debug_assert_eq!(p.spectral_norm(), 1.0);
            Ok(())
        };
        match self {
            RandomizationStrategy::Haar { generator } => check(generator),
            RandomizationStrategy::TwoDesign { generator, design } => {
                design.validate()?;
                check(generator)
            }
            RandomizationStrategy::Pool { pool } => {
                if pool.is_empty() {
                    return Err(Error::EmptyPool);
                }
                pool.iter().try_for_each(check)
            }
        }
    }
}

/// Step size `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    /// `1 / (4 ||H_p||_2)`, the inverse Lipschitz constant for unit-norm generators.
    #[default]
    Auto,
    Fixed(f64),
}

impl Gamma {
    pub fn resolve(self, h_p: &ProblemHamiltonian) -> Result<f64> {
        match self {
            Gamma::Auto => {
                let norm = h_p.spectral_norm();
                if norm <= 0.0 {
                    return Err(Error::InvalidConfig("auto gamma needs ||H_p|| > 0".into()));
                }
                Ok(1.0 / (4.0 * norm))
            }
            Gamma::Fixed(g) if g > 0.0 && g.is_finite() => Ok(g),
            Gamma::Fixed(g) => Err(Error::InvalidConfig(alloc::format!("gamma must be positive, got {g}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    #[default]
    Exact,
    /// Central difference of the exact cost with step `h`.
    FiniteDifference { h: f64 },
    /// Parameter-shift rule with `shots` measurements per shifted cost.
    Shots { shots: u64 },
}

impl GradientMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, GradientMode::Exact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Run exactly `max_steps` steps.
    #[default]
    None,
    /// Stop once the figure of merit reaches the threshold.
    AlphaThreshold(f64),
    /// Stop after `patience` consecutive steps with `|gradient| < tol`.
    GradientPatience { tol: f64, patience: usize },
}

/// Everything one adaptive run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hamiltonian: ProblemHamiltonian,
    pub strategy: RandomizationStrategy,
    pub gamma: Gamma,
    pub max_steps: usize,
    pub stop: StopRule,
    pub gradient_mode: GradientMode,
    pub seed: u64,
    pub trials: usize,
    /// Fixed initial state; a Haar-random state per trial when `None`.
    pub initial_state: Option<StateVector>,
    /// Gradient-descent updates per sampled direction.
    pub repeats: usize,
    /// Keep the `(direction, theta)` sequence in the trace.
    pub record_circuit: bool,
}

impl RunConfig {
    pub fn new(hamiltonian: ProblemHamiltonian, strategy: RandomizationStrategy) -> Self {
        Self {
            hamiltonian,
            strategy,
            gamma: Gamma::Auto,
            max_steps: 1000,
            stop: StopRule::None,
            gradient_mode: GradientMode::Exact,
            seed: 0,
            trials: 1,
            initial_state: None,
            repeats: 1,
            record_circuit: false,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        self.strategy.validate(n)?;
        self.gamma.resolve(&self.hamiltonian)?;
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        match self.gradient_mode {
            GradientMode::FiniteDifference { h } if !(h > 0.0 && h.is_finite()) => {
                return Err(Error::InvalidConfig("finite-difference step must be positive".into()))
            }
            GradientMode::Shots { shots: 0 } => {
                return Err(Error::InvalidConfig("shots must be at least 1".into()))
            }
            _ => {}
        }
        if let Some(s) = &self.initial_state {
            s.check_same(n)?;
        }
        Ok(())
    }
}
