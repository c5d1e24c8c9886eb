use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{GradientMode, StopRule, StrategyKind};

/// One adaptive step.
///
/// With `repeats > 1` the gradient is the first one measured and `theta`
/// the total angle applied along the direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub gradient: f64,
    pub theta: f64,
    #[serde(rename = "J_before")]
    pub j_before: f64,
    #[serde(rename = "J_after")]
    pub j_after: f64,
    #[serde(rename = "delta_J")]
    pub delta_j: f64,
    pub strategy: StrategyKind,
    pub direction: String,
    pub stream_id: u64,
    pub gradient_mode: GradientMode,
    /// System purity, filled in by cooling runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    /// Target fidelity, filled in by cooling runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

/// Exported gate: the direction descriptor and its angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitEntry {
    pub direction: String,
    pub theta: f64,
}

/// Full history of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub n_qubits: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub strategy: StrategyKind,
    pub gamma: f64,
    pub max_steps: usize,
    pub stop: StopRule,
    pub gradient_mode: GradientMode,
    pub e_min: f64,
    pub j_initial: f64,
    pub records: Vec<StepRecord>,
    pub final_j: f64,
    /// `alpha = J / E_min`, or fidelity `1 - J` for projector costs.
    pub final_merit: f64,
    pub stopped_early: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<Vec<CircuitEntry>>,
    /// Filled in by callers that own a clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunTrace {
    pub fn steps_taken(&self) -> usize {
        self.records.len()
    }

    /// `J_0, J_1, ..., J_M`.
    pub fn j_sequence(&self) -> Vec<f64> {
        let mut js = Vec::with_capacity(self.records.len() + 1);
        js.push(self.j_initial);
        js.extend(self.records.iter().map(|r| r.j_after));
        js
    }

    /// Cost after `m` steps, holding the last value if the run stopped early.
    pub fn j_after_steps(&self, m: usize) -> f64 {
        match m {
            0 => self.j_initial,
            m => self.records.get(m - 1).or(self.records.last()).map_or(self.j_initial, |r| r.j_after),
        }
    }

    /// True when no step raised the cost by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.records.iter().all(|r| r.delta_j >= -tol)
    }
}
