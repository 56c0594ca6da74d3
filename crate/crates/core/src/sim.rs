//! Dense statevector simulation.
//!
//! Basis index `i` encodes qubit `k` in bit `k` of `i` (qubit 0 is the least
//! significant bit). Rotations follow `R_G(θ) = exp(−iθG/2)`. Global phase is
//! carried along but never compared; everything observable is a probability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Distribution;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Tolerance on `‖ψ‖² − 1` accepted when a statevector is built from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Matrix2 = [[Complex64; 2]; 2];

/// Pure state of an `n`-qubit register as `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStatevector", into = "RawStatevector")]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// On-disk form: `{"amplitudes": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct RawStatevector {
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<RawStatevector> for Statevector {
    type Error = Error;
    fn try_from(raw: RawStatevector) -> Result<Self> {
        Statevector::from_amplitudes(
            raw.amplitudes
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<Statevector> for RawStatevector {
    fn from(s: Statevector) -> Self {
        RawStatevector {
            amplitudes: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedRegister(n_qubits));
    }
    Ok(())
}

impl Statevector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(2),
                actual: len,
            });
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ |0…0⟩` with the `extra` new qubits placed above the existing ones.
    pub fn with_ancillas(&self, extra: usize) -> Result<Self> {
        let n_qubits = self.n_qubits + extra;
        check_register(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(Self { n_qubits, amps })
    }

    /// Applies a gate in place after validating it against this register.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Applies a gate already known to fit this register.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::X(q) => self.apply_x(q),
            _ => {
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_single(gate.qubits()[0], &m);
            }
        }
    }

    fn apply_single(&mut self, qubit: usize, m: &Matrix2) {
        let stride = 1usize << qubit;
        for block in (0..self.amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a = self.amps[i];
                let b = self.amps[i + stride];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i + stride] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_x(&mut self, qubit: usize) {
        let stride = 1usize << qubit;
        for block in (0..self.amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                self.amps.swap(i, i + stride);
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }

    /// P(qubit = 1).
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.prob_one_unchecked(qubit))
    }

    pub(crate) fn prob_one_unchecked(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        p.clamp(0.0, 1.0)
    }
}

/// Gate kinds without their operands; used by circuit frameworks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U,
    H,
    X,
    Cnot,
}

impl GateKind {
    pub fn n_angles(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U => 3,
            GateKind::H | GateKind::X | GateKind::Cnot => 0,
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }
}

/// A concrete gate with all angles bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    /// `U(θ, φ, λ)`; `U(π/2, 0, π)` is exactly H.
    U(usize, f64, f64, f64),
    H(usize),
    X(usize),
    Cnot {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::U(..) => GateKind::U,
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    /// Qubits touched; for CNOT the control comes first.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::U(q, ..) => vec![q],
            Gate::H(q) | Gate::X(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) => vec![t],
            Gate::U(_, t, p, l) => vec![t, p, l],
            _ => Vec::new(),
        }
    }

    /// Builds a gate from a kind plus operand lists (as stored in frameworks).
    pub fn from_parts(kind: GateKind, qubits: &[usize], angles: &[f64]) -> Result<Self> {
        if qubits.len() != kind.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: kind.n_qubits(),
                actual: qubits.len(),
            });
        }
        if angles.len() != kind.n_angles() {
            return Err(Error::DimensionMismatch {
                expected: kind.n_angles(),
                actual: angles.len(),
            });
        }
        let q = qubits[0];
        Ok(match kind {
            GateKind::Rx => Gate::Rx(q, angles[0]),
            GateKind::Ry => Gate::Ry(q, angles[0]),
            GateKind::Rz => Gate::Rz(q, angles[0]),
            GateKind::U => Gate::U(q, angles[0], angles[1], angles[2]),
            GateKind::H => Gate::H(q),
            GateKind::X => Gate::X(q),
            GateKind::Cnot => Gate::Cnot {
                control: q,
                target: qubits[1],
            },
        })
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if let Gate::Cnot { control, target } = *self {
            if control == target {
                return Err(Error::RepeatedQubit(control));
            }
        }
        if let Some(bad) = self.angles().into_iter().find(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAngle(bad));
        }
        Ok(())
    }

    /// 2×2 unitary for single-qubit gates, `None` for CNOT.
    pub fn matrix(&self) -> Option<Matrix2> {
        let i = Complex64::i();
        Some(match *self {
            Gate::Rx(_, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[c.into(), -i * s], [-i * s, c.into()]]
            }
            Gate::Ry(_, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[c.into(), (-s).into()], [s.into(), c.into()]]
            }
            Gate::Rz(_, t) => [
                [Complex64::from_polar(1.0, -t / 2.0), ZERO],
                [ZERO, Complex64::from_polar(1.0, t / 2.0)],
            ],
            Gate::U(_, t, p, l) => {
                let (s, c) = (t / 2.0).sin_cos();
                [
                    [c.into(), -Complex64::from_polar(s, l)],
                    [Complex64::from_polar(s, p), Complex64::from_polar(c, p + l)],
                ]
            }
            Gate::H(_) => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                [[r.into(), r.into()], [r.into(), (-r).into()]]
            }
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Cnot { .. } => return None,
        })
    }
}

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Applies the circuit's gates in list order.
pub fn run_circuit(circuit: &Circuit, initial: &Statevector) -> Result<Statevector> {
    if circuit.n_qubits != initial.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits,
            actual: initial.n_qubits,
        });
    }
    let mut out = initial.clone();
    for g in &circuit.gates {
        out.apply_unchecked(g);
    }
    Ok(out)
}

/// Born-rule distribution over all basis states.
pub fn basis_probabilities(state: &Statevector) -> Distribution {
    Distribution::from_unchecked(state.amps.iter().map(|a| a.norm_sqr()).collect())
}

/// P(measuring `qubit` as 1).
pub fn output_qubit_prob(state: &Statevector, qubit: usize) -> Result<f64> {
    state.prob_one(qubit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn bell() -> Statevector {
        let c = Circuit::from_gates(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap();
        run_circuit(&c, &Statevector::zero(2).unwrap()).unwrap()
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&Statevector::zero(1).unwrap(), &Gate::H(0)).unwrap();
        assert!(close(s.amplitudes()[0].re, FRAC_1_SQRT_2));
        assert!(close(s.amplitudes()[1].re, FRAC_1_SQRT_2));
    }

    #[test]
    fn u_gate_reproduces_hadamard() {
        let s = apply_gate(&Statevector::zero(1).unwrap(), &Gate::U(0, PI / 2.0, 0.0, PI)).unwrap();
        let p = basis_probabilities(&s);
        assert!(close(p[0], 0.5) && close(p[1], 0.5));
        let u = Gate::U(0, PI / 2.0, 0.0, PI).matrix().unwrap();
        let h = Gate::H(0).matrix().unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((u[r][c] - h[r][c]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ry_rotation_probabilities() {
        let s = apply_gate(&Statevector::zero(1).unwrap(), &Gate::Ry(0, PI / 2.0)).unwrap();
        let p = basis_probabilities(&s);
        assert!(close(p[0], 0.5) && close(p[1], 0.5));
        let s = apply_gate(&Statevector::zero(1).unwrap(), &Gate::Ry(0, PI / 3.0)).unwrap();
        let p = basis_probabilities(&s);
        assert!(close(p[0], 0.75) && close(p[1], 0.25));
    }

    #[test]
    fn bell_state_preparation() {
        let s = bell();
        let a = s.amplitudes();
        assert!(close(a[0].re, FRAC_1_SQRT_2) && close(a[3].re, FRAC_1_SQRT_2));
        assert!(a[1].norm() < 1e-15 && a[2].norm() < 1e-15);
        let p = basis_probabilities(&s);
        assert_eq!(p.len(), 4);
        assert!(close(p[0], 0.5) && close(p[3], 0.5) && p[1] == 0.0 && p[2] == 0.0);
        assert!(close(output_qubit_prob(&s, 1).unwrap(), 0.5));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let s = bell();
        let c = Circuit::new(2).unwrap();
        assert_eq!(run_circuit(&c, &s).unwrap(), s);
    }

    #[test]
    fn zero_state_distribution() {
        let p = basis_probabilities(&Statevector::zero(3).unwrap());
        assert_eq!(p[0], 1.0);
        assert!(p.iter().skip(1).all(|&x| x == 0.0));
    }

    #[test]
    fn marginal_of_product_state() {
        // |q1 q0⟩ = |1 0⟩ is basis index 2.
        let s = Statevector::basis(2, 2).unwrap();
        assert_eq!(output_qubit_prob(&s, 1).unwrap(), 1.0);
        assert_eq!(output_qubit_prob(&s, 0).unwrap(), 0.0);
    }

    #[test]
    fn cnot_flips_target_iff_control_set() {
        for n in 2..=4 {
            for index in 0..(1 << n) {
                for control in 0..n {
                    for target in (0..n).filter(|&t| t != control) {
                        let s = Statevector::basis(n, index).unwrap();
                        let out = apply_gate(&s, &Gate::Cnot { control, target }).unwrap();
                        let expected = if index >> control & 1 == 1 {
                            index ^ (1 << target)
                        } else {
                            index
                        };
                        assert_eq!(out, Statevector::basis(n, expected).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_gates() {
        let s = Statevector::zero(2).unwrap();
        assert!(matches!(
            apply_gate(&s, &Gate::H(2)),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            apply_gate(&s, &Gate::Rx(0, f64::NAN)),
            Err(Error::NonFiniteAngle(_))
        ));
        assert!(matches!(
            apply_gate(&s, &Gate::Cnot { control: 1, target: 1 }),
            Err(Error::RepeatedQubit(1))
        ));
        assert!(output_qubit_prob(&s, 5).is_err());
    }

    #[test]
    fn run_circuit_rejects_mismatch() {
        let c = Circuit::new(3).unwrap();
        assert!(matches!(
            run_circuit(&c, &Statevector::zero(2).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn register_limits() {
        assert!(Statevector::zero(0).is_err());
        assert!(Statevector::zero(MAX_QUBITS + 1).is_err());
        assert!(Statevector::zero(MAX_QUBITS).is_ok());
        assert!(Statevector::from_amplitudes(vec![ONE, ONE]).is_err());
        assert!(Statevector::from_amplitudes(vec![ONE, ZERO, ZERO]).is_err());
    }

    #[test]
    fn ancillas_are_high_qubits() {
        let s = bell().with_ancillas(1).unwrap();
        assert_eq!(s.n_qubits(), 3);
        assert_eq!(output_qubit_prob(&s, 2).unwrap(), 0.0);
        assert!(close(output_qubit_prob(&s, 1).unwrap(), 0.5));
    }

    #[test]
    fn json_round_trip() {
        let s = bell();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with("{\"amplitudes\""));
        let back: Statevector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Statevector>("{\"amplitudes\":[[1,0],[1,0]]}").is_err());
    }
}
