use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::RandomizationStrategy;
use crate::linalg::{
    apply_pauli_rotation, expm_hermitian, DenseOperator, Observable, PauliString, StateVector,
};
use crate::random::{sample_pool, two_design_circuit, DesignFlavor, HouseholderUnitary, RngStream, SampledUnitary};
use crate::{Error, Result, C64};

const INVOLUTION_TOL: f64 = 1e-10;

/// One sampled tangent direction `H_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// `V^† H V`, kept factored so it is never materialized.
    Conjugated {
        generator: PauliString,
        unitary: SampledUnitary,
        label: &'static str,
    },
    Pauli(PauliString),
    /// General Hermitian direction; rotations go through an eigendecomposition.
    Dense(DenseOperator),
}

impl Direction {
    /// Draw a direction according to `strategy`.
    pub fn sample(strategy: &RandomizationStrategy, n_qubits: usize, rng: &mut RngStream) -> Result<Self> {
        Ok(match strategy {
            RandomizationStrategy::Haar { generator } => Direction::Conjugated {
                generator: generator.clone(),
                unitary: SampledUnitary::Haar(HouseholderUnitary::sample(n_qubits, rng)?),
                label: "haar",
            },
            RandomizationStrategy::TwoDesign { generator, design } => Direction::Conjugated {
                generator: generator.clone(),
                unitary: SampledUnitary::Circuit(two_design_circuit(n_qubits, design, rng)?),
                label: match design.flavor {
                    DesignFlavor::Clifford => "clifford",
                    DesignFlavor::Brickwork => "brickwork",
                },
            },
            RandomizationStrategy::Pool { pool } => Direction::Pauli(sample_pool(pool, rng)?.clone()),
        })
    }

    pub fn is_involutory(&self) -> bool {
        match self {
            Direction::Conjugated { generator, .. } => generator.coefficient().abs() == 1.0,
            Direction::Pauli(p) => p.coefficient().abs() == 1.0,
            Direction::Dense(op) => {
                let m = op.matrix();
                let sq = m * m;
                let d = m.nrows();
                (0..d).all(|i| {
                    (0..d).all(|j| {
                        let want = if i == j { 1.0 } else { 0.0 };
                        (sq[(i, j)] - C64::new(want, 0.0)).norm() <= INVOLUTION_TOL
                    })
                })
            }
        }
    }

    /// Short identifier for traces: the pool element, or the sampled
    /// unitary's fingerprint.
    pub fn describe(&self) -> String {
        match self {
            Direction::Conjugated { unitary, label, .. } => {
                format!("{label}:{:016x}", unitary.fingerprint())
            }
            Direction::Pauli(p) => format!("{p}"),
            Direction::Dense(_) => String::from("dense"),
        }
    }

    /// Materialize `H_k` as a matrix.
    pub fn to_dense(&self) -> DenseOperator {
        match self {
            Direction::Conjugated { generator, unitary, .. } => generator
                .to_dense()
                .conjugate_by(&unitary.to_dense())
                .expect("generator and unitary share the register"),
            Direction::Pauli(p) => p.to_dense(),
            Direction::Dense(op) => op.clone(),
        }
    }

    /// `exp(-i theta H_k)|state>`. Conjugated directions are applied as
    /// `V^† exp(-i theta H) V`.
    pub fn rotate(&self, state: &StateVector, theta: f64) -> Result<StateVector> {
        state.check_same(self.n_qubits())?;
        match self {
            Direction::Conjugated { generator, unitary, .. } => {
                let mut amps = state.amplitudes().to_vec();
                unitary.apply(&mut amps);
                let inner = StateVector::from_raw(state.n_qubits(), amps);
                let mut amps = apply_pauli_rotation(&inner, generator, theta)?.into_amplitudes();
                unitary.apply_adjoint(&mut amps);
                Ok(StateVector::from_raw(state.n_qubits(), amps))
            }
            Direction::Pauli(p) => apply_pauli_rotation(state, p, theta),
            Direction::Dense(op) => {
                let u = expm_hermitian(op, theta)?;
                crate::linalg::apply_dense(state, &u)
            }
        }
    }

    /// Rotation that reuses a precomputed `H_k psi`; valid only for
    /// involutory directions.
    pub(crate) fn rotate_with(psi: &[C64], hk_psi: &[C64], theta: f64) -> Vec<C64> {
        let (s, c) = theta.sin_cos();
        let minus_i_s = C64::new(0.0, -s);
        psi.iter().zip(hk_psi).map(|(a, h)| a * c + h * minus_i_s).collect()
    }
}

impl Observable for Direction {
    fn n_qubits(&self) -> usize {
        match self {
            Direction::Conjugated { generator, .. } => generator.n_qubits(),
            Direction::Pauli(p) => p.n_qubits(),
            Direction::Dense(op) => op.n_qubits(),
        }
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        match self {
            Direction::Conjugated { generator, unitary, .. } => {
                let mut tmp = input.to_vec();
                unitary.apply(&mut tmp);
                generator.apply_into(&tmp, out);
                unitary.apply_adjoint(out);
            }
            Direction::Pauli(p) => p.apply_into(input, out),
            Direction::Dense(op) => op.apply_into(input, out),
        }
    }

    fn is_hermitian(&self) -> bool {
        match self {
            Direction::Dense(op) => op.is_hermitian(),
            _ => true,
        }
    }
}

impl TryFrom<DenseOperator> for Direction {
    type Error = Error;

    fn try_from(op: DenseOperator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        Ok(Direction::Dense(op))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Pauli;
    use crate::random::TwoDesignConfig;

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn factored_rotation_matches_dense_exponential() {
        let mut rng = RngStream::new(21, 0);
        for n in 1..=3 {
            let gen = PauliString::single(n, 0, Pauli::X).unwrap();
            for strategy in [
                RandomizationStrategy::Haar { generator: gen.clone() },
                RandomizationStrategy::TwoDesign {
                    generator: gen.clone(),
                    design: TwoDesignConfig::default(),
                },
                RandomizationStrategy::TwoDesign {
                    generator: gen.clone(),
                    design: TwoDesignConfig { flavor: DesignFlavor::Brickwork, layers: 2 },
                },
            ] {
                let dir = Direction::sample(&strategy, n, &mut rng).unwrap();
                let psi = crate::random::random_state(n, &mut rng).unwrap();
                let theta = 0.37;
                let fast = dir.rotate(&psi, theta).unwrap();
                let u = expm_hermitian(&dir.to_dense(), theta).unwrap();
                let slow = crate::linalg::apply_dense(&psi, &u).unwrap();
                assert!(max_diff(fast.amplitudes(), slow.amplitudes()) < 1e-8);
                let dense = Direction::Dense(dir.to_dense());
                assert!(dense.is_involutory());
                let via_dense = dense.rotate(&psi, theta).unwrap();
                assert!(max_diff(fast.amplitudes(), via_dense.amplitudes()) < 1e-8);
                let hk = dir.apply(psi.amplitudes());
                let shared = Direction::rotate_with(psi.amplitudes(), &hk, theta);
                assert!(max_diff(fast.amplitudes(), &shared) < 1e-12);
            }
        }
    }

    #[test]
    fn pool_direction_is_a_pool_member() {
        let pool: Vec<PauliString> = ["X", "Y", "Z"].iter().map(|s| s.parse().unwrap()).collect();
        let strategy = RandomizationStrategy::Pool { pool: pool.clone() };
        let mut rng = RngStream::new(5, 5);
        for _ in 0..20 {
            match Direction::sample(&strategy, 1, &mut rng).unwrap() {
                Direction::Pauli(p) => assert!(pool.contains(&p)),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn non_involutory_dense_direction_detected() {
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
        let dir = Direction::try_from(DenseOperator::new(1, m).unwrap()).unwrap();
        assert!(!dir.is_involutory());
    }
}
