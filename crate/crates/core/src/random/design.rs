use serde::{Deserialize, Serialize};

use super::{random_clifford, Circuit, Gate, HouseholderUnitary, RngStream};
use crate::linalg::DenseOperator;
use crate::{check_qubit_cap, Error, Result, C64, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignFlavor {
    /// Uniform Clifford element; an exact unitary 2-design.
    Clifford,
    /// Layers of Haar single-qubit rotations followed by a CZ chain.
    Brickwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoDesignConfig {
    pub flavor: DesignFlavor,
    /// Number of brickwork layers; ignored by the Clifford flavor.
    pub layers: usize,
}

impl Default for TwoDesignConfig {
    fn default() -> Self {
        Self {
            flavor: DesignFlavor::Clifford,
            layers: 1,
        }
    }
}

impl TwoDesignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::InvalidConfig("2-design layers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample from a 2-design as a gate circuit.
pub fn two_design_circuit(n_qubits: usize, cfg: &TwoDesignConfig, rng: &mut RngStream) -> Result<Circuit> {
    check_qubit_cap(n_qubits, MAX_QUBITS)?;
    cfg.validate()?;
    match cfg.flavor {
        DesignFlavor::Clifford => random_clifford(n_qubits, rng),
        DesignFlavor::Brickwork => {
            let mut c = Circuit::new(n_qubits);
            for _ in 0..cfg.layers {
                for q in 0..n_qubits {
                    let u = HouseholderUnitary::sample(1, rng)?.to_dense();
                    let m = u.matrix();
                    c.push(Gate::U1(q, [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]));
                }
                for q in 0..n_qubits.saturating_sub(1) {
                    c.push(Gate::Cz(q, q + 1));
                }
            }
            Ok(c)
        }
    }
}

/// Sample from a 2-design as a dense operator.
pub fn two_design_unitary(n_qubits: usize, cfg: &TwoDesignConfig, rng: &mut RngStream) -> Result<DenseOperator> {
    Ok(two_design_circuit(n_qubits, cfg, rng)?.to_dense())
}

/// A sampled conjugating unitary `V`, kept in whichever form applies cheaply.
#[derive(Debug, Clone, PartialEq)]
pub enum SampledUnitary {
    Haar(HouseholderUnitary),
    Circuit(Circuit),
}

impl SampledUnitary {
    pub fn n_qubits(&self) -> usize {
        match self {
            SampledUnitary::Haar(h) => h.n_qubits(),
            SampledUnitary::Circuit(c) => c.n_qubits(),
        }
    }

    pub fn apply(&self, amps: &mut [C64]) {
        match self {
            SampledUnitary::Haar(h) => h.apply(amps),
            SampledUnitary::Circuit(c) => c.apply(amps),
        }
    }

    pub fn apply_adjoint(&self, amps: &mut [C64]) {
        match self {
            SampledUnitary::Haar(h) => h.apply_adjoint(amps),
            SampledUnitary::Circuit(c) => c.apply_adjoint(amps),
        }
    }

    pub fn to_dense(&self) -> DenseOperator {
        match self {
            SampledUnitary::Haar(h) => h.to_dense(),
            SampledUnitary::Circuit(c) => c.to_dense(),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        match self {
            SampledUnitary::Haar(h) => h.fingerprint(),
            SampledUnitary::Circuit(c) => c.fingerprint(),
        }
    }
}
