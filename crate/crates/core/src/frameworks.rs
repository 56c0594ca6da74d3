//! Circuit frameworks: gate layouts whose rotation angles are left open.
//!
//! Both the generator and the discriminator are layered hardware-efficient
//! ansätze: every layer puts an RY then an RZ on each qubit and finishes with
//! a CNOT chain `q0→q1→…→q(m−1)`. The single-qubit generator is instead one
//! U gate, which covers every 1-qubit state.

use std::f64::consts::TAU;
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Circuit, Gate, GateKind};

/// Largest data register the frameworks are built for.
pub const MAX_DATA_QUBITS: usize = 8;

/// Source of one gate angle: an open parameter slot or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angles: Vec<Angle>,
}

impl Slot {
    pub fn param(kind: GateKind, qubit: usize, index: usize) -> Self {
        Self {
            kind,
            qubits: vec![qubit],
            angles: vec![Angle::Param(index)],
        }
    }

    pub fn fixed(gate: Gate) -> Self {
        Self {
            kind: gate.kind(),
            qubits: gate.qubits(),
            angles: gate.angles().into_iter().map(Angle::Fixed).collect(),
        }
    }
}

/// Ordered slot layout on `n_qubits` with `param_count` open angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFramework")]
pub struct CircuitFramework {
    n_qubits: usize,
    slots: Vec<Slot>,
    param_count: usize,
}

#[derive(Deserialize)]
struct RawFramework {
    n_qubits: usize,
    slots: Vec<Slot>,
}

impl TryFrom<RawFramework> for CircuitFramework {
    type Error = Error;
    fn try_from(raw: RawFramework) -> Result<Self> {
        CircuitFramework::new(raw.n_qubits, raw.slots)
    }
}

impl CircuitFramework {
    /// Validates the layout; parameter indices must cover `0..k` exactly once each.
    pub fn new(n_qubits: usize, slots: Vec<Slot>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::sim::MAX_QUBITS {
            return Err(Error::UnsupportedRegister(n_qubits));
        }
        let mut seen = Vec::<bool>::new();
        for slot in &slots {
            if slot.qubits.len() != slot.kind.n_qubits() || slot.angles.len() != slot.kind.n_angles() {
                return Err(Error::InvalidFramework(format!("malformed {:?} slot", slot.kind)));
            }
            for &q in &slot.qubits {
                if q >= n_qubits {
                    return Err(Error::QubitOutOfRange { index: q, n_qubits });
                }
            }
            if slot.kind == GateKind::Cnot && slot.qubits[0] == slot.qubits[1] {
                return Err(Error::RepeatedQubit(slot.qubits[0]));
            }
            for angle in &slot.angles {
                match *angle {
                    Angle::Param(i) => {
                        if i >= seen.len() {
                            seen.resize(i + 1, false);
                        }
                        if std::mem::replace(&mut seen[i], true) {
                            return Err(Error::InvalidFramework(format!("parameter {i} used twice")));
                        }
                    }
                    Angle::Fixed(a) if !a.is_finite() => return Err(Error::NonFiniteAngle(a)),
                    Angle::Fixed(_) => {}
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidFramework(format!("parameter {i} never used")));
        }
        Ok(Self {
            n_qubits,
            param_count: seen.len(),
            slots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Appends a slot, renumbering nothing; the result is revalidated.
    pub fn with_slot(&self, slot: Slot) -> Result<Self> {
        let mut slots = self.slots.clone();
        slots.push(slot);
        Self::new(self.n_qubits, slots)
    }

    /// Runs `parts` one after another on an `n_qubits` register.
    ///
    /// Each part acts on the lowest qubits of the register; its parameters are
    /// shifted past those of the parts before it, so the composed vector is the
    /// concatenation of the individual vectors.
    pub fn compose(n_qubits: usize, parts: &[&CircuitFramework]) -> Result<Self> {
        let mut slots = Vec::new();
        let mut offset = 0;
        for part in parts {
            if part.n_qubits > n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: part.n_qubits - 1,
                    n_qubits,
                });
            }
            for slot in &part.slots {
                let mut slot = slot.clone();
                for a in &mut slot.angles {
                    if let Angle::Param(i) = a {
                        *i += offset;
                    }
                }
                slots.push(slot);
            }
            offset += part.param_count;
        }
        Self::new(n_qubits, slots)
    }

    /// Fills every slot from `params`. The gate layout never depends on the values.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.param_count {
            return Err(Error::ParameterCount {
                expected: self.param_count,
                actual: params.len(),
            });
        }
        if let Some(&bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFiniteAngle(bad));
        }
        let mut circuit = Circuit::new(self.n_qubits)?;
        for slot in &self.slots {
            let angles: Vec<f64> = slot
                .angles
                .iter()
                .map(|a| match *a {
                    Angle::Param(i) => params[i],
                    Angle::Fixed(v) => v,
                })
                .collect();
            circuit.push(Gate::from_parts(slot.kind, &slot.qubits, &angles)?)?;
        }
        Ok(circuit)
    }

    /// Uniform angles on `[0, 2π)`, one draw per slot in index order.
    pub fn random_parameters<R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterVector {
        ParameterVector((0..self.param_count).map(|_| rng.random_range(0.0..TAU)).collect())
    }

    /// One JSON object per slot, newline separated, preceded by a header line.
    pub fn to_jsonl(&self) -> String {
        let mut out = format!(
            "{{\"n_qubits\":{},\"param_count\":{}}}\n",
            self.n_qubits, self.param_count
        );
        for slot in &self.slots {
            out.push_str(&serde_json::to_string(slot).expect("slot serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            n_qubits: usize,
            param_count: usize,
        }
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Header = serde_json::from_str(lines.next().ok_or(Error::Empty("framework"))?)?;
        let slots = lines
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<Slot>, _>>()?;
        let fw = Self::new(header.n_qubits, slots)?;
        if fw.param_count != header.param_count {
            return Err(Error::InvalidFramework(format!(
                "header declares {} parameters, slots use {}",
                header.param_count, fw.param_count
            )));
        }
        Ok(fw)
    }
}

fn check_data_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DATA_QUBITS {
        return Err(Error::QubitCountOutOfRange(n));
    }
    Ok(())
}

fn layered(n_qubits: usize, layers: usize) -> Result<CircuitFramework> {
    let mut slots = Vec::with_capacity(layers * (3 * n_qubits - 1));
    let mut next = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            slots.push(Slot::param(GateKind::Ry, q, next));
            slots.push(Slot::param(GateKind::Rz, q, next + 1));
            next += 2;
        }
        for q in 0..n_qubits - 1 {
            slots.push(Slot::fixed(Gate::Cnot {
                control: q,
                target: q + 1,
            }));
        }
    }
    CircuitFramework::new(n_qubits, slots)
}

/// Generator on `n` data qubits: one U gate for `n = 1`, otherwise `n + 1`
/// layers, giving `2·n·(n+1)` parameters.
pub fn build_generator(n: usize) -> Result<CircuitFramework> {
    check_data_qubits(n)?;
    if n == 1 {
        let slot = Slot {
            kind: GateKind::U,
            qubits: vec![0],
            angles: vec![Angle::Param(0), Angle::Param(1), Angle::Param(2)],
        };
        return CircuitFramework::new(1, vec![slot]);
    }
    layered(n, n + 1)
}

/// Discriminator for `n` data qubits: acts on `n + 1` qubits with the output
/// qubit at index `n`, using `n` layers (`2·(n+1)·n` parameters).
pub fn build_discriminator(n: usize) -> Result<CircuitFramework> {
    check_data_qubits(n)?;
    layered(n + 1, n)
}

/// Angles bound to a framework, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteAngle(bad));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ParameterVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(p: ParameterVector) -> Self {
        p.0
    }
}

impl Deref for ParameterVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Binds `params` to `framework`.
pub fn bind_parameters(framework: &CircuitFramework, params: &ParameterVector) -> Result<Circuit> {
    framework.bind(params)
}
