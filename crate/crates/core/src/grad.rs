//! Analytic gradients of a measured-qubit probability by the parameter-shift
//! rule, with central finite differences as an independent check.
//!
//! Each open parameter drives exactly one rotation `exp(−iθG/2)` with `G² = I`,
//! so `∂p/∂θ = [p(θ + π/2) − p(θ − π/2)] / 2` holds exactly. U slots are
//! lowered to `RZ(φ)·RY(θ)·RZ(λ)`, which matches U up to a global phase.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::frameworks::{Angle, CircuitFramework};
use crate::sim::{Gate, GateKind, Statevector};

/// Probability of the measured qubit plus its partials for the requested parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbGradient {
    pub value: f64,
    pub partials: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Fixed(Gate),
    Rotation { kind: GateKind, qubit: usize, param: usize },
}

impl Op {
    fn gate(&self, params: &[f64], shift: f64) -> Gate {
        match *self {
            Op::Fixed(g) => g,
            Op::Rotation { kind, qubit, param } => {
                let angle = params[param] + shift;
                match kind {
                    GateKind::Rx => Gate::Rx(qubit, angle),
                    GateKind::Ry => Gate::Ry(qubit, angle),
                    _ => Gate::Rz(qubit, angle),
                }
            }
        }
    }
}

/// A framework lowered to single-parameter rotations, ready for repeated
/// probability and gradient evaluation.
#[derive(Debug, Clone)]
pub struct ShiftableCircuit {
    n_qubits: usize,
    param_count: usize,
    ops: Vec<Op>,
    // parameter index -> op index
    position: Vec<Option<usize>>,
}

impl ShiftableCircuit {
    pub fn new(framework: &CircuitFramework) -> Result<Self> {
        let mut ops = Vec::new();
        for slot in framework.slots() {
            let q = slot.qubits[0];
            let rotation = |kind, angle: Angle| match angle {
                Angle::Param(param) => Op::Rotation { kind, qubit: q, param },
                Angle::Fixed(v) => Op::Fixed(match kind {
                    GateKind::Rx => Gate::Rx(q, v),
                    GateKind::Ry => Gate::Ry(q, v),
                    _ => Gate::Rz(q, v),
                }),
            };
            match slot.kind {
                GateKind::Rx | GateKind::Ry | GateKind::Rz => ops.push(rotation(slot.kind, slot.angles[0])),
                GateKind::U => {
                    let (theta, phi, lambda) = (slot.angles[0], slot.angles[1], slot.angles[2]);
                    ops.push(rotation(GateKind::Rz, lambda));
                    ops.push(rotation(GateKind::Ry, theta));
                    ops.push(rotation(GateKind::Rz, phi));
                }
                kind => ops.push(Op::Fixed(Gate::from_parts(kind, &slot.qubits, &[])?)),
            }
        }
        let param_count = framework.param_count();
        let mut uses = vec![0usize; param_count];
        let mut position = vec![None; param_count];
        for (k, op) in ops.iter().enumerate() {
            if let Op::Rotation { param, .. } = *op {
                uses[param] += 1;
                position[param] = Some(k);
            }
        }
        for (param, &n) in uses.iter().enumerate() {
            if n != 1 {
                position[param] = None;
            }
        }
        Ok(Self {
            n_qubits: framework.n_qubits(),
            param_count,
            ops,
            position,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    fn check(&self, params: &[f64], initial: &Statevector, qubit: usize, wrt: &[usize]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParameterCount {
                expected: self.param_count,
                actual: params.len(),
            });
        }
        if let Some(&bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFiniteAngle(bad));
        }
        if initial.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: initial.n_qubits(),
            });
        }
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        for &j in wrt {
            if j >= self.param_count {
                return Err(Error::ParameterOutOfRange {
                    index: j,
                    len: self.param_count,
                });
            }
            if self.position[j].is_none() {
                return Err(Error::NonShiftable(j));
            }
        }
        Ok(())
    }

    fn run_from(
        &self,
        mut state: Statevector,
        start: usize,
        params: &[f64],
        shifted: Option<(usize, f64)>,
    ) -> Statevector {
        for (k, op) in self.ops.iter().enumerate().skip(start) {
            let shift = match shifted {
                Some((at, s)) if at == k => s,
                _ => 0.0,
            };
            state.apply_unchecked(&op.gate(params, shift));
        }
        state
    }

    /// Final state of the circuit bound to `params`.
    pub fn final_state(&self, params: &[f64], initial: &Statevector) -> Result<Statevector> {
        self.check(params, initial, 0, &[])?;
        Ok(self.run_from(initial.clone(), 0, params, None))
    }

    pub fn prob(&self, params: &[f64], initial: &Statevector, qubit: usize) -> Result<f64> {
        self.check(params, initial, qubit, &[])?;
        Ok(self
            .run_from(initial.clone(), 0, params, None)
            .prob_one_unchecked(qubit))
    }

    /// Parameter-shift gradient. The forward pass caches the state in front of
    /// every differentiated gate so each shifted run only replays the suffix.
    pub fn prob_and_gradient(
        &self,
        params: &[f64],
        initial: &Statevector,
        qubit: usize,
        wrt: &[usize],
    ) -> Result<ProbGradient> {
        self.check(params, initial, qubit, wrt)?;
        let mut wanted = vec![false; self.ops.len()];
        for &j in wrt {
            wanted[self.position[j].expect("checked")] = true;
        }
        let mut cache: Vec<Option<Statevector>> = vec![None; self.ops.len()];
        let mut state = initial.clone();
        for (k, op) in self.ops.iter().enumerate() {
            if wanted[k] {
                cache[k] = Some(state.clone());
            }
            state.apply_unchecked(&op.gate(params, 0.0));
        }
        let value = state.prob_one_unchecked(qubit);
        let partials = wrt
            .iter()
            .map(|&j| {
                let k = self.position[j].expect("checked");
                let before = cache[k].as_ref().expect("cached");
                let plus = self
                    .run_from(before.clone(), k, params, Some((k, FRAC_PI_2)))
                    .prob_one_unchecked(qubit);
                let minus = self
                    .run_from(before.clone(), k, params, Some((k, -FRAC_PI_2)))
                    .prob_one_unchecked(qubit);
                (plus - minus) / 2.0
            })
            .collect();
        Ok(ProbGradient { value, partials })
    }

    /// Central differences `[p(θ+h) − p(θ−h)] / 2h`.
    pub fn finite_difference(
        &self,
        params: &[f64],
        initial: &Statevector,
        qubit: usize,
        wrt: &[usize],
        h: f64,
    ) -> Result<ProbGradient> {
        if !(h > 0.0 && h <= 1e-2) {
            return Err(Error::InvalidStep(h));
        }
        self.check(params, initial, qubit, wrt)?;
        let value = self
            .run_from(initial.clone(), 0, params, None)
            .prob_one_unchecked(qubit);
        let mut shifted = params.to_vec();
        let partials = wrt
            .iter()
            .map(|&j| {
                let theta = params[j];
                shifted[j] = theta + h;
                let plus = self
                    .run_from(initial.clone(), 0, &shifted, None)
                    .prob_one_unchecked(qubit);
                shifted[j] = theta - h;
                let minus = self
                    .run_from(initial.clone(), 0, &shifted, None)
                    .prob_one_unchecked(qubit);
                shifted[j] = theta;
                (plus - minus) / (2.0 * h)
            })
            .collect();
        Ok(ProbGradient { value, partials })
    }
}

pub fn prob_and_gradient(
    circuit: &CircuitFramework,
    params: &[f64],
    initial: &Statevector,
    measured_qubit: usize,
    wrt: &[usize],
) -> Result<ProbGradient> {
    ShiftableCircuit::new(circuit)?.prob_and_gradient(params, initial, measured_qubit, wrt)
}

pub fn finite_difference(
    circuit: &CircuitFramework,
    params: &[f64],
    initial: &Statevector,
    measured_qubit: usize,
    wrt: &[usize],
    h: f64,
) -> Result<ProbGradient> {
    ShiftableCircuit::new(circuit)?.finite_difference(params, initial, measured_qubit, wrt, h)
}
