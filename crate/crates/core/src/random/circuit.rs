use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{qubit_bit, DenseOperator};
use crate::C64;

/// Gate of a sampled circuit. Qubit indices follow the register convention
/// (qubit 0 is the leftmost tensor factor).
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    /// Arbitrary single-qubit unitary, row-major `[[a, b], [c, d]]`.
    U1(usize, [C64; 4]),
}

impl Gate {
    pub fn adjoint(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::U1(q, [a, b, c, d]) => Gate::U1(q, [a.conj(), c.conj(), b.conj(), d.conj()]),
            ref g => g.clone(),
        }
    }

    fn apply_1q(n: usize, q: usize, m: [C64; 4], amps: &mut [C64]) {
        let bit = qubit_bit(n, q);
        for i in 0..amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (amps[i], amps[i | bit]);
                amps[i] = m[0] * a0 + m[1] * a1;
                amps[i | bit] = m[2] * a0 + m[3] * a1;
            }
        }
    }

    /// Applies the gate in place to a `2^n` amplitude vector.
    pub fn apply(&self, n: usize, amps: &mut [C64]) {
        let i = C64::new(0.0, 1.0);
        match *self {
            Gate::H(q) => {
                let bit = qubit_bit(n, q);
                let s = core::f64::consts::FRAC_1_SQRT_2;
                for k in 0..amps.len() {
                    if k & bit == 0 {
                        let (a0, a1) = (amps[k], amps[k | bit]);
                        amps[k] = (a0 + a1) * s;
                        amps[k | bit] = (a0 - a1) * s;
                    }
                }
            }
            Gate::S(q) | Gate::Sdg(q) | Gate::Z(q) => {
                let phase = match self {
                    Gate::S(_) => i,
                    Gate::Sdg(_) => -i,
                    _ => C64::new(-1.0, 0.0),
                };
                let bit = qubit_bit(n, q);
                amps.iter_mut()
                    .enumerate()
                    .filter(|(k, _)| k & bit != 0)
                    .for_each(|(_, a)| *a *= phase);
            }
            Gate::X(q) => {
                let bit = qubit_bit(n, q);
                for k in 0..amps.len() {
                    if k & bit == 0 {
                        amps.swap(k, k | bit);
                    }
                }
            }
            Gate::Y(q) => {
                // Y|0> = i|1>, Y|1> = -i|0>.
                let bit = qubit_bit(n, q);
                for k in 0..amps.len() {
                    if k & bit == 0 {
                        let (a0, a1) = (amps[k], amps[k | bit]);
                        amps[k] = -i * a1;
                        amps[k | bit] = i * a0;
                    }
                }
            }
            Gate::Cx { control, target } => {
                let (c, t) = (qubit_bit(n, control), qubit_bit(n, target));
                for k in 0..amps.len() {
                    if k & c != 0 && k & t == 0 {
                        amps.swap(k, k | t);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let mask = qubit_bit(n, a) | qubit_bit(n, b);
                amps.iter_mut()
                    .enumerate()
                    .filter(|(k, _)| k & mask == mask)
                    .for_each(|(_, v)| *v = -*v);
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (qubit_bit(n, a), qubit_bit(n, b));
                for k in 0..amps.len() {
                    if k & ba != 0 && k & bb == 0 {
                        amps.swap(k, (k & !ba) | bb);
                    }
                }
            }
            Gate::U1(q, m) => Self::apply_1q(n, q, m, amps),
        }
    }
}

/// Gate sequence applied left to right.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: Circuit) {
        self.gates.extend(other.gates);
    }

    /// `amps <- U amps`.
    pub fn apply(&self, amps: &mut [C64]) {
        for g in &self.gates {
            g.apply(self.n_qubits, amps);
        }
    }

    /// `amps <- U^† amps`.
    pub fn apply_adjoint(&self, amps: &mut [C64]) {
        for g in self.gates.iter().rev() {
            g.adjoint().apply(self.n_qubits, amps);
        }
    }

    pub fn to_dense(&self) -> DenseOperator {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        let mut col = alloc::vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.apply(&mut col);
            m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        }
        DenseOperator::from_matrix_unchecked(self.n_qubits, m, true)
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = super::splitmix64(self.n_qubits as u64 ^ ((self.gates.len() as u64) << 32));
        for g in &self.gates {
            let code: u64 = match *g {
                Gate::H(q) => q as u64,
                Gate::S(q) => 0x100 | q as u64,
                Gate::Sdg(q) => 0x200 | q as u64,
                Gate::X(q) => 0x300 | q as u64,
                Gate::Y(q) => 0x400 | q as u64,
                Gate::Z(q) => 0x500 | q as u64,
                Gate::Cx { control, target } => 0x600 | ((control as u64) << 16) | target as u64,
                Gate::Cz(a, b) => 0x700 | ((a as u64) << 16) | b as u64,
                Gate::Swap(a, b) => 0x800 | ((a as u64) << 16) | b as u64,
                Gate::U1(q, m) => {
                    let mut c = 0x900 | q as u64;
                    for z in m {
                        c = super::splitmix64(c ^ z.re.to_bits() ^ z.im.to_bits().rotate_left(17));
                    }
                    c
                }
            };
            h = super::splitmix64(h ^ code);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{PauliString, SpectralNorm};
    use approx::assert_abs_diff_eq;

    fn assert_matrix_eq(a: &DenseOperator, b: &DenseOperator) {
        for (x, y) in a.matrix().iter().zip(b.matrix().iter()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-14);
        }
    }

    fn single(g: Gate, n: usize) -> DenseOperator {
        let mut c = Circuit::new(n);
        c.push(g);
        c.to_dense()
    }

    #[test]
    fn pauli_gates_match_pauli_strings() {
        for (g, label) in [(Gate::X(1), "IXI"), (Gate::Y(0), "YII"), (Gate::Z(2), "IIZ")] {
            assert_matrix_eq(&single(g, 3), &label.parse::<PauliString>().unwrap().to_dense());
        }
    }

    #[test]
    fn hadamard_and_phase() {
        assert_matrix_eq(&single(Gate::H(0), 1), &DenseOperator::hadamard());
        let s = single(Gate::S(0), 1);
        let s2 = s.compose(&s).unwrap();
        assert_matrix_eq(&s2, &"Z".parse::<PauliString>().unwrap().to_dense());
        let id = single(Gate::S(0), 1).compose(&single(Gate::Sdg(0), 1)).unwrap();
        assert_matrix_eq(&id, &DenseOperator::identity(1).unwrap());
    }

    #[test]
    fn cnot_control_is_first_argument() {
        // |10> -> |11> with control on qubit 0 (leftmost).
        let cx = single(Gate::Cx { control: 0, target: 1 }, 2);
        assert_abs_diff_eq!(cx.matrix()[(3, 2)].re, 1.0);
        assert_abs_diff_eq!(cx.matrix()[(2, 2)].norm(), 0.0);
        assert_abs_diff_eq!(cx.matrix()[(1, 1)].re, 1.0);
    }

    #[test]
    fn swap_exchanges_qubits() {
        let sw = single(Gate::Swap(0, 2), 3);
        let zi = "ZII".parse::<PauliString>().unwrap().to_dense();
        let iz = "IIZ".parse::<PauliString>().unwrap().to_dense();
        assert_matrix_eq(&zi.conjugate_by(&sw).unwrap(), &iz);
    }

    #[test]
    fn adjoint_inverts() {
        let mut c = Circuit::new(2);
        c.push(Gate::H(0));
        c.push(Gate::S(1));
        c.push(Gate::Cx { control: 1, target: 0 });
        let s = C64::new(0.6, 0.0);
        let t = C64::new(0.0, 0.8);
        c.push(Gate::U1(1, [s, t, t, s]));
        let d = c.to_dense();
        assert!(d.unitarity_defect() < 1e-14);
        let mut v = alloc::vec![C64::new(0.5, 0.0); 4];
        c.apply(&mut v);
        c.apply_adjoint(&mut v);
        for a in v {
            assert_abs_diff_eq!((a - C64::new(0.5, 0.0)).norm(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(d.spectral_norm(), 1.0, epsilon = 1e-10);
    }
}
