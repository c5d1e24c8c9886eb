//! Uniform Clifford sampling as a gate circuit.
//!
//! The symplectic group factors as a tower of cosets: a Clifford is fixed,
//! up to Pauli signs, by the images `(a, b)` of `X_0` and `Z_0` (an
//! anticommuting pair, drawn uniformly) and by a Clifford on the remaining
//! qubits. For each pair we synthesize a circuit `R` with
//! `R a R^† = ±X_0`, `R b R^† = ±Z_0`; the concatenation of these circuits
//! over qubits `0, 1, ..., n-1` followed by a uniformly random Pauli layer is
//! the inverse of a uniform Clifford, hence itself uniform.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{Circuit, Gate, RngStream};
use crate::linalg::{Pauli, PauliString};
use crate::{check_qubit_cap, Result, MAX_QUBITS};

/// Pauli operator modulo sign, as `x` and `z` bit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticPauli {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl SymplecticPauli {
    pub fn identity(n: usize) -> Self {
        Self {
            x: vec![false; n],
            z: vec![false; n],
        }
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        let mut s = Self::identity(p.n_qubits());
        for (q, f) in p.factors().iter().enumerate() {
            s.x[q] = matches!(f, Pauli::X | Pauli::Y);
            s.z[q] = matches!(f, Pauli::Z | Pauli::Y);
        }
        s
    }

    pub fn to_pauli(&self) -> PauliString {
        let factors = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| match (x, z) {
                (false, false) => Pauli::I,
                (true, false) => Pauli::X,
                (true, true) => Pauli::Y,
                (false, true) => Pauli::Z,
            })
            .collect();
        PauliString::new(factors).expect("register size already validated")
    }

    pub fn anticommutes(&self, other: &SymplecticPauli) -> bool {
        let mut parity = false;
        for q in 0..self.x.len() {
            parity ^= (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q]);
        }
        parity
    }

    fn is_single(&self, q: usize, want_x: bool, want_z: bool) -> bool {
        (0..self.x.len()).all(|k| {
            if k == q {
                self.x[k] == want_x && self.z[k] == want_z
            } else {
                !self.x[k] && !self.z[k]
            }
        })
    }

    /// `P <- G P G^†`, ignoring signs.
    pub fn conjugate(&mut self, g: &Gate) {
        match *g {
            Gate::H(q) => core::mem::swap(&mut self.x[q], &mut self.z[q]),
            Gate::S(q) | Gate::Sdg(q) => self.z[q] ^= self.x[q],
            Gate::Cx { control, target } => {
                self.x[target] ^= self.x[control];
                self.z[control] ^= self.z[target];
            }
            Gate::Cz(a, b) => {
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
            Gate::Swap(a, b) => {
                self.x.swap(a, b);
                self.z.swap(a, b);
            }
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) => {}
            Gate::U1(..) => panic!("non-Clifford gate in symplectic tracking"),
        }
    }
}

struct Reducer<'a> {
    a: &'a mut SymplecticPauli,
    b: &'a mut SymplecticPauli,
    circuit: Circuit,
}

impl Reducer<'_> {
    fn emit(&mut self, g: Gate) {
        self.a.conjugate(&g);
        self.b.conjugate(&g);
        self.circuit.push(g);
    }

    /// Maps the tracked Pauli (`a` if `on_a`, else `b`) to `X_first`.
    fn sweep_to_x(&mut self, on_a: bool, first: usize) {
        let n = self.a.x.len();
        for q in first..n {
            let p = if on_a { &*self.a } else { &*self.b };
            if p.z[q] {
                // Y -> X with a phase gate, Z -> X with a Hadamard.
                self.emit(if p.x[q] { Gate::S(q) } else { Gate::H(q) });
            }
        }
        let p = if on_a { &*self.a } else { &*self.b };
        let mut support: Vec<usize> = (first..n).filter(|&q| p.x[q]).collect();
        while support.len() > 1 {
            for pair in support.chunks(2) {
                if let [c, t] = *pair {
                    self.emit(Gate::Cx { control: c, target: t });
                }
            }
            support = support.iter().copied().step_by(2).collect();
        }
        if let Some(&q) = support.first() {
            if q != first {
                self.emit(Gate::Swap(first, q));
            }
        }
    }
}

/// Circuit `R` on qubits `first..n` with `R a R^† = ±X_first` and
/// `R b R^† = ±Z_first`. `a` and `b` must anticommute and act trivially on
/// qubits before `first`; both are updated in place.
pub fn reduce_pair_to_x_z(a: &mut SymplecticPauli, b: &mut SymplecticPauli, first: usize) -> Circuit {
    let n = a.x.len();
    debug_assert!(a.anticommutes(b));
    let mut r = Reducer {
        a,
        b,
        circuit: Circuit::new(n),
    };
    r.sweep_to_x(true, first);
    if !r.b.is_single(first, false, true) {
        r.emit(Gate::H(first));
        r.sweep_to_x(false, first);
        r.emit(Gate::H(first));
    }
    r.circuit
}

fn random_nonidentity(n: usize, first: usize, rng: &mut RngStream) -> SymplecticPauli {
    loop {
        let mut p = SymplecticPauli::identity(n);
        for q in first..n {
            p.x[q] = rng.random();
            p.z[q] = rng.random();
        }
        if (first..n).any(|q| p.x[q] || p.z[q]) {
            return p;
        }
    }
}

/// Uniformly random `n`-qubit Clifford (up to global phase) as a circuit.
pub fn random_clifford(n_qubits: usize, rng: &mut RngStream) -> Result<Circuit> {
    check_qubit_cap(n_qubits, MAX_QUBITS)?;
    let mut circuit = Circuit::new(n_qubits);
    for first in 0..n_qubits {
        let mut a = random_nonidentity(n_qubits, first, rng);
        let mut b = loop {
            let cand = random_nonidentity(n_qubits, first, rng);
            if cand.anticommutes(&a) {
                break cand;
            }
        };
        circuit.extend(reduce_pair_to_x_z(&mut a, &mut b, first));
    }
    for q in 0..n_qubits {
        match rng.random_range(0..4u8) {
            1 => circuit.push(Gate::X(q)),
            2 => circuit.push(Gate::Y(q)),
            3 => circuit.push(Gate::Z(q)),
            _ => {}
        }
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseOperator;
    use crate::C64;
    use alloc::collections::BTreeMap;

    /// Index of `±P` among signed Paulis if `m` is one, else `None`.
    fn signed_pauli_of(m: &DenseOperator) -> Option<(PauliString, bool)> {
        let n = m.n_qubits();
        for code in 0..1usize << (2 * n) {
            let factors = (0..n)
                .map(|q| match (code >> (2 * q)) & 3 {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                })
                .collect();
            let p = PauliString::new(factors).unwrap();
            let pd = p.to_dense();
            for (sign, s) in [(false, 1.0), (true, -1.0)] {
                let close = pd
                    .matrix()
                    .iter()
                    .zip(m.matrix().iter())
                    .all(|(x, y)| (x * C64::new(s, 0.0) - y).norm() < 1e-9);
                if close {
                    return Some((p, sign));
                }
            }
        }
        None
    }

    #[test]
    fn reduction_maps_pair_to_x_and_z() {
        let mut rng = RngStream::new(42, 0);
        for n in 1..=3 {
            for _ in 0..50 {
                let a0 = random_nonidentity(n, 0, &mut rng);
                let b0 = loop {
                    let c = random_nonidentity(n, 0, &mut rng);
                    if c.anticommutes(&a0) {
                        break c;
                    }
                };
                let (mut a, mut b) = (a0.clone(), b0.clone());
                let r = reduce_pair_to_x_z(&mut a, &mut b, 0);
                let rd = r.to_dense();
                // Dense check that R a R^† = ±X_0 and R b R^† = ±Z_0.
                let conj = |p: &SymplecticPauli| {
                    let pd = p.to_pauli().to_dense();
                    rd.compose(&pd).unwrap().compose(&rd.adjoint()).unwrap()
                };
                let (pa, _) = signed_pauli_of(&conj(&a0)).unwrap();
                let (pb, _) = signed_pauli_of(&conj(&b0)).unwrap();
                assert_eq!(pa, PauliString::single(n, 0, Pauli::X).unwrap());
                assert_eq!(pb, PauliString::single(n, 0, Pauli::Z).unwrap());
                assert_eq!(a.to_pauli(), pa);
                assert_eq!(b.to_pauli(), pb);
            }
        }
    }

    #[test]
    fn sample_conjugates_z_to_signed_pauli() {
        let mut rng = RngStream::new(1, 2);
        for n in 1..=3 {
            for _ in 0..10 {
                let c = random_clifford(n, &mut rng).unwrap().to_dense();
                let z = PauliString::single(n, 0, Pauli::Z).unwrap().to_dense();
                assert!(signed_pauli_of(&z.conjugate_by(&c).unwrap()).is_some());
                assert!(c.unitarity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn single_qubit_cliffords_are_uniform() {
        // 24 elements modulo phase, identified by the signed images of X and Z.
        let mut rng = RngStream::new(9, 0);
        let x = PauliString::single(1, 0, Pauli::X).unwrap().to_dense();
        let z = PauliString::single(1, 0, Pauli::Z).unwrap().to_dense();
        let samples = 24_000;
        let mut counts: BTreeMap<(alloc::string::String, bool, alloc::string::String, bool), u32> =
            BTreeMap::new();
        for _ in 0..samples {
            let c = random_clifford(1, &mut rng).unwrap().to_dense();
            let (px, sx) = signed_pauli_of(&x.conjugate_by(&c).unwrap()).unwrap();
            let (pz, sz) = signed_pauli_of(&z.conjugate_by(&c).unwrap()).unwrap();
            *counts.entry(((&px).into(), sx, (&pz).into(), sz)).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = samples as f64 / 24.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 23 degrees of freedom; the 99.9% quantile is 49.7.
        assert!(chi2 < 49.7, "chi2 = {chi2}");
    }
}
