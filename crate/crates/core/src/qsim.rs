//! Dense pure-state simulator.
//!
//! Qubit `i` of a `q`-qubit register is bit `q − 1 − i` of the amplitude
//! index, so qubit 0 is the most significant bit, the same ordering as
//! [`BitVector`] strings.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binlin::BitVector;
use crate::error::{Error, Result};

/// Tolerance for state-level checks (norms, fidelities).
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance for algebraic identities (unitarity, commutation).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Registers above this size are rejected.
pub const MAX_QUBITS: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn gate(self) -> Gate {
        match self {
            Pauli::I => Gate::identity(),
            Pauli::X => Gate::pauli_x(),
            Pauli::Y => Gate::pauli_y(),
            Pauli::Z => Gate::pauli_z(),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

/// Unitary acting on one (2×2) or two (4×4) qubits, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    dim: usize,
    m: Vec<Complex64>,
}

impl Gate {
    /// Validates shape and unitarity (`M·M† = I` within [`ALGEBRA_TOL`]).
    pub fn new(dim: usize, m: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidArgument(format!("gate dimension {dim}")));
        }
        if m.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: m.len(),
            });
        }
        let g = Self { dim, m };
        if !g.is_unitary(ALGEBRA_TOL) {
            return Err(Error::InvalidArgument("gate is not unitary".into()));
        }
        Ok(g)
    }

    fn single(m: [[Complex64; 2]; 2]) -> Self {
        Self {
            dim: 2,
            m: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    pub fn identity() -> Self {
        Self::single([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn pauli_x() -> Self {
        Self::single([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self::single([[ZERO, -i], [i, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::single([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let h = Self::re(std::f64::consts::FRAC_1_SQRT_2);
        Self::single([[h, h], [h, -h]])
    }

    /// Real rotation `((cos θ, −sin θ), (sin θ, cos θ))`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::single([[Self::re(c), Self::re(-s)], [Self::re(s), Self::re(c)]])
    }

    /// Controlled-NOT on (control, target) as a 4×4 gate.
    pub fn cnot() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[5] = ONE;
        m[11] = ONE;
        m[14] = ONE;
        Self { dim: 4, m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Gate {
        let d = self.dim;
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.m[r * d + c].conj();
            }
        }
        Gate { dim: d, m }
    }

    pub fn matmul(&self, other: &Gate) -> Result<Gate> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[r * d + c] = (0..d).map(|k| self.entry(r, k) * other.entry(k, c)).sum();
            }
        }
        Ok(Gate { dim: d, m })
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.matmul(&self.adjoint()).expect("same dimension");
        (0..self.dim).all(|r| {
            (0..self.dim).all(|c| {
                let want = if r == c { ONE } else { ZERO };
                (p.entry(r, c) - want).norm() <= tol
            })
        })
    }

    pub fn approx_eq(&self, other: &Gate, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .m
                .iter()
                .zip(&other.m)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// Normalized pure state over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::Unsupported(format!("{num_qubits}-qubit register")));
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state `|bits⟩`.
    pub fn basis_state(bits: &BitVector) -> Result<Self> {
        let mut s = Self::zero(bits.len())?;
        s.amps[0] = ZERO;
        s.amps[bits.to_u64() as usize] = ONE;
        Ok(s)
    }

    /// Equal-weight superposition of distinct, equal-length strings.
    pub fn uniform_superposition(strings: &[BitVector]) -> Result<Self> {
        let first = strings
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty string list".into()))?;
        let mut s = Self::zero(first.len())?;
        s.amps[0] = ZERO;
        let a = Complex64::new(1.0 / (strings.len() as f64).sqrt(), 0.0);
        for v in strings {
            if v.len() != first.len() {
                return Err(Error::Dimension {
                    expected: first.len(),
                    found: v.len(),
                });
            }
            let idx = v.to_u64() as usize;
            if s.amps[idx] != ZERO {
                return Err(Error::InvalidArgument(format!("duplicate string {v}")));
            }
            s.amps[idx] = a;
        }
        Ok(s)
    }

    /// Builds a state from raw amplitudes, checking the length and norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("{n} amplitudes")));
        }
        let s = Self {
            num_qubits: n.trailing_zeros() as usize,
            amps,
        };
        if (s.norm_sqr() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("norm² = {}", s.norm_sqr())));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &BitVector) -> Complex64 {
        self.amps[bits.to_u64() as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::Index {
                index: qubit,
                len: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Applies a 2×2 gate to one qubit.
    pub fn apply_single(&mut self, gate: &Gate, qubit: usize) -> Result<()> {
        self.apply_masked(gate, qubit, None)
    }

    /// Applies a 2×2 gate to `target` on the branch where `control` is 1.
    pub fn apply_controlled(&mut self, gate: &Gate, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        if control == target {
            return Err(Error::InvalidArgument(format!(
                "control and target are both qubit {control}"
            )));
        }
        self.apply_masked(gate, target, Some(self.mask(control)))
    }

    fn apply_masked(&mut self, gate: &Gate, qubit: usize, control: Option<usize>) -> Result<()> {
        self.check_qubit(qubit)?;
        if gate.dim != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: gate.dim,
            });
        }
        let mask = self.mask(qubit);
        let [m00, m01, m10, m11] = [gate.m[0], gate.m[1], gate.m[2], gate.m[3]];
        for i in 0..self.amps.len() {
            if i & mask != 0 || control.is_some_and(|c| i & c == 0) {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | mask];
            self.amps[i] = m00 * a0 + m01 * a1;
            self.amps[i | mask] = m10 * a0 + m11 * a1;
        }
        Ok(())
    }

    /// Applies a 4×4 gate to the ordered pair `(first, second)`; `first`
    /// is the more significant bit of the gate's basis index.
    pub fn apply_two(&mut self, gate: &Gate, first: usize, second: usize) -> Result<()> {
        self.check_qubit(first)?;
        self.check_qubit(second)?;
        if first == second {
            return Err(Error::InvalidArgument("two-qubit gate on one qubit".into()));
        }
        if gate.dim != 4 {
            return Err(Error::Dimension {
                expected: 4,
                found: gate.dim,
            });
        }
        let (ma, mb) = (self.mask(first), self.mask(second));
        for i in 0..self.amps.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let old = idx.map(|j| self.amps[j]);
            for (r, &j) in idx.iter().enumerate() {
                self.amps[j] = (0..4).map(|c| gate.entry(r, c) * old[c]).sum();
            }
        }
        Ok(())
    }

    /// Applies `gate` to every qubit.
    pub fn apply_all(&mut self, gate: &Gate) -> Result<()> {
        for q in 0..self.num_qubits {
            self.apply_single(gate, q)?;
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, pauli: Pauli, qubit: usize) -> Result<()> {
        if pauli == Pauli::I {
            return self.check_qubit(qubit);
        }
        self.apply_single(&pauli.gate(), qubit)
    }

    /// Probability of reading 1 on `qubit`.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Born-rule measurement of one qubit in the Z basis; the state is
    /// collapsed and renormalized.
    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.probability_one(qubit)?;
        let outcome = u8::from(rng.gen::<f64>() < p1);
        self.collapse(qubit, outcome)?;
        Ok(outcome)
    }

    /// Projects `qubit` onto `outcome` and renormalizes.
    pub fn collapse(&mut self, qubit: usize, outcome: u8) -> Result<()> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let keep_set = outcome == 1;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) != keep_set {
                *a = ZERO;
            }
        }
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "outcome {outcome} on qubit {qubit} has zero probability"
            )));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(())
    }

    /// Measures every qubit in the Z basis at once and collapses onto the
    /// sampled basis state.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BitVector {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = self.amps.len() - 1;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if r < acc {
                pick = i;
                break;
            }
        }
        // guard against rounding leaving the tail index on a zero amplitude
        while self.amps[pick].norm_sqr() == 0.0 && pick > 0 {
            pick -= 1;
        }
        let bits = BitVector::from_u64(pick as u64, self.num_qubits);
        self.amps.iter_mut().for_each(|a| *a = ZERO);
        self.amps[pick] = ONE;
        bits
    }

    /// Appends one qubit in `|0⟩` as the new least significant qubit.
    pub fn push_zero_qubit(&mut self) -> Result<()> {
        if self.num_qubits + 1 > MAX_QUBITS {
            return Err(Error::Unsupported(format!(
                "{}-qubit register",
                self.num_qubits + 1
            )));
        }
        let mut amps = vec![ZERO; self.amps.len() * 2];
        for (i, a) in self.amps.iter().enumerate() {
            amps[i << 1] = *a;
        }
        self.amps = amps;
        self.num_qubits += 1;
        Ok(())
    }

    /// Removes the last qubit, which must already be in the basis state
    /// `|value⟩` (e.g. right after measuring it).
    pub fn pop_qubit(&mut self, value: u8) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::InvalidArgument("empty register".into()));
        }
        let amps: Vec<Complex64> = self
            .amps
            .iter()
            .skip(usize::from(value & 1))
            .step_by(2)
            .copied()
            .collect();
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "last qubit is not in |{value}⟩ (weight {norm})"
            )));
        }
        self.amps = amps;
        self.num_qubits -= 1;
        Ok(())
    }

    /// `⟨self| P₀⊗…⊗P_{q−1} |self⟩` for a Pauli string.
    pub fn expectation(&self, paulis: &[Pauli]) -> Result<f64> {
        if paulis.len() != self.num_qubits {
            return Err(Error::Dimension {
                expected: self.num_qubits,
                found: paulis.len(),
            });
        }
        let mut other = self.clone();
        for (q, &p) in paulis.iter().enumerate() {
            other.apply_pauli(p, q)?;
        }
        Ok(inner(self, &other)?.re)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Dimension {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `⟨a|b⟩`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::Dimension {
            expected: a.num_qubits,
            found: b.num_qubits,
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn basis_states() {
        let s = StateVector::basis_state(&bv("0")).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = StateVector::basis_state(&bv("11")).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);
        assert!((s.norm_sqr() - 1.0).abs() < STATE_TOL);
    }

    #[test]
    fn superposition_checks() {
        let single = StateVector::uniform_superposition(&[bv("101")]).unwrap();
        assert_eq!(single, StateVector::basis_state(&bv("101")).unwrap());
        let dup = StateVector::uniform_superposition(&[bv("10"), bv("10")]);
        assert!(matches!(dup, Err(Error::InvalidArgument(_))));
        let three = StateVector::uniform_superposition(&[bv("00"), bv("01"), bv("11")]).unwrap();
        assert!((three.norm_sqr() - 1.0).abs() < STATE_TOL);
    }

    #[test]
    fn rotation_gates() {
        assert!(Gate::rotation(0.0).approx_eq(&Gate::identity(), 0.0));
        let r = Gate::rotation(FRAC_PI_2);
        let expect = Gate::new(2, vec![ZERO, -ONE, ONE, ZERO]).unwrap();
        assert!(r.approx_eq(&expect, ALGEBRA_TOL));
        let mut s = StateVector::basis_state(&bv("0")).unwrap();
        s.apply_single(&r, 0).unwrap();
        assert!(
            (fidelity(&s, &StateVector::basis_state(&bv("1")).unwrap()).unwrap() - 1.0).abs()
                < STATE_TOL
        );
        let round = Gate::rotation(0.83).matmul(&Gate::rotation(-0.83)).unwrap();
        assert!(round.approx_eq(&Gate::identity(), ALGEBRA_TOL));
    }

    #[test]
    fn standard_gates_are_unitary() {
        for g in [
            Gate::identity(),
            Gate::pauli_x(),
            Gate::pauli_y(),
            Gate::pauli_z(),
            Gate::hadamard(),
            Gate::rotation(1.234),
            Gate::cnot(),
        ] {
            assert!(g.is_unitary(ALGEBRA_TOL));
        }
        let bad = Gate::new(2, vec![ONE, ONE, ZERO, ONE]);
        assert!(bad.is_err());
    }

    #[test]
    fn single_qubit_application() {
        let mut s = StateVector::basis_state(&bv("00")).unwrap();
        let before = s.clone();
        s.apply_single(&Gate::identity(), 1).unwrap();
        assert_eq!(s, before);
        s.apply_single(&Gate::pauli_x(), 0).unwrap();
        assert_eq!(s, StateVector::basis_state(&bv("10")).unwrap());
        assert_eq!(
            s.apply_single(&Gate::pauli_x(), 2),
            Err(Error::Index { index: 2, len: 2 })
        );
    }

    #[test]
    fn controlled_application() {
        let mut s = StateVector::basis_state(&bv("10")).unwrap();
        s.apply_controlled(&Gate::pauli_x(), 0, 1).unwrap();
        assert_eq!(s, StateVector::basis_state(&bv("11")).unwrap());
        let mut s = StateVector::basis_state(&bv("00")).unwrap();
        s.apply_controlled(&Gate::pauli_x(), 0, 1).unwrap();
        assert_eq!(s, StateVector::basis_state(&bv("00")).unwrap());
        assert!(s.apply_controlled(&Gate::pauli_x(), 1, 1).is_err());

        let mut a =
            StateVector::uniform_superposition(&[bv("00"), bv("01"), bv("10"), bv("11")]).unwrap();
        a.apply_single(&Gate::rotation(0.3), 0).unwrap();
        let mut b = a.clone();
        a.apply_controlled(&Gate::pauli_z(), 0, 1).unwrap();
        b.apply_controlled(&Gate::pauli_z(), 1, 0).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn two_qubit_cnot_matches_controlled_x() {
        let mut a = StateVector::uniform_superposition(&[bv("000"), bv("101"), bv("110")]).unwrap();
        a.apply_single(&Gate::rotation(0.4), 1).unwrap();
        let mut b = a.clone();
        a.apply_two(&Gate::cnot(), 2, 0).unwrap();
        b.apply_controlled(&Gate::pauli_x(), 2, 0).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut one = StateVector::basis_state(&bv("1")).unwrap();
        for _ in 0..100 {
            assert_eq!(one.measure_qubit(0, &mut rng).unwrap(), 1);
        }
        let plus = StateVector::from_amplitudes(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let trials = 10_000;
        let mut zeros = 0;
        for _ in 0..trials {
            let mut s = plus.clone();
            if s.measure_qubit(0, &mut rng).unwrap() == 0 {
                zeros += 1;
            }
            assert!((s.norm_sqr() - 1.0).abs() < STATE_TOL);
        }
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::basis_state(&bv("0")).unwrap();
        let one = StateVector::basis_state(&bv("1")).unwrap();
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!(fidelity(&zero, &StateVector::zero(2).unwrap()).is_err());

        let mut a = StateVector::uniform_superposition(&[bv("00"), bv("11")]).unwrap();
        let mut b = StateVector::uniform_superposition(&[bv("01"), bv("11")]).unwrap();
        let f0 = fidelity(&a, &b).unwrap();
        for s in [&mut a, &mut b] {
            s.apply_single(&Gate::hadamard(), 0).unwrap();
            s.apply_controlled(&Gate::pauli_y(), 0, 1).unwrap();
        }
        assert!((fidelity(&a, &b).unwrap() - f0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn ancilla_push_and_pop() {
        let mut s = StateVector::uniform_superposition(&[bv("01"), bv("10")]).unwrap();
        let before = s.clone();
        s.push_zero_qubit().unwrap();
        assert_eq!(s.num_qubits(), 3);
        s.pop_qubit(0).unwrap();
        assert_eq!(s, before);
        s.push_zero_qubit().unwrap();
        assert!(s.pop_qubit(1).is_err());
    }

    #[test]
    fn expectation_values() {
        let s = StateVector::basis_state(&bv("01")).unwrap();
        assert_eq!(s.expectation(&[Pauli::Z, Pauli::I]).unwrap(), 1.0);
        assert_eq!(s.expectation(&[Pauli::Z, Pauli::Z]).unwrap(), -1.0);
        assert_eq!(s.expectation(&[Pauli::X, Pauli::I]).unwrap(), 0.0);
    }
}
