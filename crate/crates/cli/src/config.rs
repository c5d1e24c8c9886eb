//! TOML configuration. Every field is optional; unknown keys are errors.
//!
//! ```toml
//! [problem]
//! kind = "ising"           # ising | projector
//! graph = "complete:4"     # complete:<n> | regular:<n>:<d>:<seed> | edge-list path
//!
//! [strategy]
//! kind = "haar"            # haar | two_design | pool
//!
//! [run]
//! max_steps = 5000
//! trials = 100
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use raq_prep_core::dilation::{CoolingConfig, KickPolicy};
use raq_prep_core::engine::{Gamma, GradientMode, RandomizationStrategy, RunConfig, StopRule, StrategyKind};
use raq_prep_core::hamiltonian::{ising_from_graph, projector_hamiltonian, ProblemHamiltonian};
use raq_prep_core::linalg::{weight_graded_pool, DensityMatrix, PauliString, StateVector};
use raq_prep_core::random::{DesignFlavor, TwoDesignConfig};

use crate::error::{CliError, CliResult};
use crate::graph_spec::{instantiate, resolve_graph};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub problem: ProblemSection,
    pub strategy: StrategySection,
    pub run: RunSection,
    pub sweep: SweepSection,
    pub cooling: CoolingSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    #[default]
    Ising,
    Projector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    /// Graph spec for Ising problems; may contain `{n}` in qubit sweeps.
    pub graph: String,
    /// Target label (`0`, `1`, `+`, `-` per qubit) for projector problems.
    pub target: Option<String>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { kind: ProblemKind::Ising, graph: "complete:4".into(), target: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategySection {
    pub kind: StrategyKind,
    /// Pauli label such as `XIII`; defaults to X on qubit 0.
    pub generator: Option<String>,
    pub flavor: DesignFlavor,
    pub layers: usize,
    /// `full`, `weight:<w>` (every string up to weight w) or `size:<k>`
    /// (first k strings of the weight-graded order).
    pub pool: String,
    /// Explicit pool; overrides `pool`.
    pub pool_elements: Option<Vec<String>>,
}

impl Default for StrategySection {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Haar,
            generator: None,
            flavor: DesignFlavor::Clifford,
            layers: 1,
            pool: "full".into(),
            pool_elements: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Fixed(f64),
    Named(String),
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Named("auto".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientKind {
    #[default]
    Exact,
    FiniteDifference,
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    #[default]
    None,
    Alpha,
    Patience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub gamma: GammaSpec,
    pub max_steps: usize,
    pub gradient: GradientKind,
    pub fd_step: f64,
    pub shots: u64,
    pub stop: StopKind,
    pub alpha_threshold: f64,
    pub grad_tol: f64,
    pub patience: usize,
    pub repeats: usize,
    pub record_circuit: bool,
    /// Fixed initial state label; Haar-random per trial when absent.
    pub initial_state: Option<String>,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            gamma: GammaSpec::default(),
            max_steps: 1000,
            gradient: GradientKind::Exact,
            fd_step: 1e-5,
            shots: 1000,
            stop: StopKind::None,
            alpha_threshold: 0.99,
            grad_tol: 1e-8,
            patience: 100,
            repeats: 1,
            record_circuit: false,
            initial_state: None,
            seed: 0,
            trials: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Figure of merit at step checkpoints.
    #[default]
    StepsM,
    /// Figure of merit at `max_steps` for growing weight-graded pools.
    PoolSize,
    /// Threshold crossing versus qubit count.
    NQubits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Smallest `M` with mean merit above the threshold.
    #[default]
    Steps,
    /// Smallest pool prefix with mean merit above the threshold at `max_steps`.
    PoolSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub name: String,
    pub axis: Axis,
    /// Axis values: checkpoints, pool sizes or qubit counts. Checkpoints
    /// default to a 1-2-5 grid up to `max_steps`.
    pub values: Option<Vec<usize>>,
    pub strategies: Vec<StrategyKind>,
    /// Qubit-axis sweeps only.
    pub measure: Measure,
    pub threshold: f64,
    /// Candidate pool sizes for `measure = "pool_size"`; a default grid
    /// when absent.
    pub pool_sizes: Option<Vec<usize>>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            name: "sweep".into(),
            axis: Axis::StepsM,
            values: None,
            strategies: vec![StrategyKind::Haar],
            measure: Measure::Steps,
            threshold: 0.99,
            pool_sizes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoolingSection {
    pub n_ancilla: usize,
    pub target: String,
    /// `mixed` or a pure-state label.
    pub rho0: String,
    pub kick: KickPolicy,
}

impl Default for CoolingSection {
    fn default() -> Self {
        Self { n_ancilla: 1, target: "0".into(), rho0: "mixed".into(), kick: KickPolicy::Auto }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn gamma(&self) -> CliResult<Gamma> {
        match &self.run.gamma {
            GammaSpec::Fixed(g) => Ok(Gamma::Fixed(*g)),
            GammaSpec::Named(s) if s == "auto" => Ok(Gamma::Auto),
            GammaSpec::Named(s) => Err(CliError::Config(format!("gamma must be \"auto\" or a number, got {s:?}"))),
        }
    }

    pub fn gradient_mode(&self) -> GradientMode {
        match self.run.gradient {
            GradientKind::Exact => GradientMode::Exact,
            GradientKind::FiniteDifference => GradientMode::FiniteDifference { h: self.run.fd_step },
            GradientKind::Shots => GradientMode::Shots { shots: self.run.shots },
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        match self.run.stop {
            StopKind::None => StopRule::None,
            StopKind::Alpha => StopRule::AlphaThreshold(self.run.alpha_threshold),
            StopKind::Patience => StopRule::GradientPatience { tol: self.run.grad_tol, patience: self.run.patience },
        }
    }

    /// Problem Hamiltonian; `n` instantiates `{n}` in the graph spec.
    pub fn hamiltonian(&self, base_dir: Option<&Path>, n: Option<usize>) -> CliResult<ProblemHamiltonian> {
        match self.problem.kind {
            ProblemKind::Ising => {
                let spec = match n {
                    Some(n) => instantiate(&self.problem.graph, n),
                    None => self.problem.graph.clone(),
                };
                if spec.contains("{n}") {
                    return Err(CliError::Config(format!("graph spec {spec:?} needs a qubit count")));
                }
                let g = resolve_graph(&spec, base_dir)?;
                Ok(ising_from_graph(&g)?)
            }
            ProblemKind::Projector => {
                let label = self
                    .problem
                    .target
                    .as_deref()
                    .ok_or_else(|| CliError::Config("projector problems need problem.target".into()))?;
                Ok(projector_hamiltonian(&parse_label(label)?)?)
            }
        }
    }

    fn generator(&self, n: usize) -> CliResult<PauliString> {
        match &self.strategy.generator {
            Some(s) => parse_pauli(s, n),
            None => Ok(RandomizationStrategy::default_generator(n)?),
        }
    }

    /// The configured pool on `n` qubits.
    pub fn pool(&self, n: usize) -> CliResult<Vec<PauliString>> {
        if let Some(elems) = &self.strategy.pool_elements {
            return elems.iter().map(|s| parse_pauli(s, n)).collect();
        }
        let full = weight_graded_pool(n)?;
        let spec = self.strategy.pool.as_str();
        let parse_num = |s: &str| -> CliResult<usize> {
            s.parse().map_err(|_| CliError::Config(format!("bad pool spec {spec:?}")))
        };
        match spec.split_once(':') {
            None if spec == "full" => Ok(full),
            Some(("weight", w)) => {
                let w = parse_num(w)?;
                Ok(full.into_iter().filter(|p| p.weight() <= w).collect())
            }
            Some(("size", k)) => {
                let k = parse_num(k)?;
                if k == 0 || k > full.len() {
                    return Err(CliError::Config(format!("pool size {k} outside 1..={}", full.len())));
                }
                Ok(full.into_iter().take(k).collect())
            }
            _ => Err(CliError::Config(format!("bad pool spec {spec:?}; use full, weight:<w> or size:<k>"))),
        }
    }

    pub fn strategy_for(&self, kind: StrategyKind, n: usize) -> CliResult<RandomizationStrategy> {
        Ok(match kind {
            StrategyKind::Haar => RandomizationStrategy::Haar { generator: self.generator(n)? },
            StrategyKind::TwoDesign => RandomizationStrategy::TwoDesign {
                generator: self.generator(n)?,
                design: TwoDesignConfig { flavor: self.strategy.flavor, layers: self.strategy.layers },
            },
            StrategyKind::Pool => RandomizationStrategy::Pool { pool: self.pool(n)? },
        })
    }

    /// Engine configuration for the configured strategy.
    pub fn run_config(&self, base_dir: Option<&Path>) -> CliResult<RunConfig> {
        let h = self.hamiltonian(base_dir, None)?;
        self.run_config_with(h, self.strategy.kind)
    }

    pub fn run_config_with(&self, h: ProblemHamiltonian, kind: StrategyKind) -> CliResult<RunConfig> {
        let n = h.n_qubits();
        let mut cfg = RunConfig::new(h, self.strategy_for(kind, n)?);
        cfg.gamma = self.gamma()?;
        cfg.max_steps = self.run.max_steps;
        cfg.stop = self.stop_rule();
        cfg.gradient_mode = self.gradient_mode();
        cfg.seed = self.run.seed;
        cfg.trials = self.run.trials;
        cfg.repeats = self.run.repeats;
        cfg.record_circuit = self.run.record_circuit;
        cfg.initial_state = self.run.initial_state.as_deref().map(parse_label).transpose()?;
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }

    pub fn cooling_config(&self) -> CliResult<CoolingConfig> {
        let target = parse_label(&self.cooling.target)?;
        let ns = target.n_qubits();
        let mut cfg = CoolingConfig::new(target, self.cooling.n_ancilla).map_err(config_err)?;
        let n = cfg.n_qubits();
        cfg.rho0_system = match self.cooling.rho0.as_str() {
            "mixed" => None,
            label => {
                let psi = parse_label(label)?;
                if psi.n_qubits() != ns {
                    return Err(CliError::Config("cooling.rho0 and cooling.target differ in size".into()));
                }
                Some(DensityMatrix::from_pure(&psi).map_err(config_err)?)
            }
        };
        cfg.strategy = self.strategy_for(self.strategy.kind, n)?;
        cfg.gamma = self.gamma()?;
        cfg.max_steps = self.run.max_steps;
        cfg.stop = self.stop_rule();
        cfg.gradient_mode = self.gradient_mode();
        cfg.seed = self.run.seed;
        cfg.trials = self.run.trials;
        cfg.kick = self.cooling.kick;
        cfg.record_circuit = self.run.record_circuit;
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

fn parse_label(label: &str) -> CliResult<StateVector> {
    StateVector::from_label(label).map_err(|e| CliError::Config(format!("state label {label:?}: {e}")))
}

fn parse_pauli(s: &str, n: usize) -> CliResult<PauliString> {
    let p: PauliString = s.parse().map_err(|e| CliError::Config(format!("Pauli string {s:?}: {e}")))?;
    if p.n_qubits() != n {
        return Err(CliError::Config(format!("Pauli string {s:?} acts on {} qubits, expected {n}", p.n_qubits())));
    }
    Ok(p)
}

/// Directory that relative paths in a config file resolve against.
pub fn base_dir_of(config_path: Option<&Path>) -> Option<PathBuf> {
    config_path.and_then(|p| p.parent()).map(Path::to_path_buf)
}
