use std::fmt;

use sha2::{Digest, Sha256};

use crate::qcore::Gate;

/// One circuit element over the protocol gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    X(usize),
    Z(usize),
    H(usize),
    P(usize),
    R(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    Measure(usize),
    /// Allocates a fresh `|0⟩` wire; carries the index it receives.
    Aux(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    X,
    Z,
    H,
    P,
    Cnot,
    R,
    Measure,
    Aux,
}

impl OpKind {
    pub const ALL: [OpKind; 8] = [
        OpKind::X,
        OpKind::Z,
        OpKind::H,
        OpKind::P,
        OpKind::Cnot,
        OpKind::R,
        OpKind::Measure,
        OpKind::Aux,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            OpKind::X => "X",
            OpKind::Z => "Z",
            OpKind::H => "H",
            OpKind::P => "P",
            OpKind::Cnot => "CNOT",
            OpKind::R => "R",
            OpKind::Measure => "MEASURE",
            OpKind::Aux => "AUX",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<OpKind> {
        OpKind::ALL
            .into_iter()
            .find(|k| k.mnemonic().eq_ignore_ascii_case(s))
    }

    pub fn is_clifford(self) -> bool {
        matches!(
            self,
            OpKind::X | OpKind::Z | OpKind::H | OpKind::P | OpKind::Cnot
        )
    }
}

impl GateOp {
    pub fn kind(&self) -> OpKind {
        match self {
            GateOp::X(_) => OpKind::X,
            GateOp::Z(_) => OpKind::Z,
            GateOp::H(_) => OpKind::H,
            GateOp::P(_) => OpKind::P,
            GateOp::R(_) => OpKind::R,
            GateOp::Cnot { .. } => OpKind::Cnot,
            GateOp::Measure(_) => OpKind::Measure,
            GateOp::Aux(_) => OpKind::Aux,
        }
    }

    /// Wires touched, control first for CNOT.
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            GateOp::X(w)
            | GateOp::Z(w)
            | GateOp::H(w)
            | GateOp::P(w)
            | GateOp::R(w)
            | GateOp::Measure(w)
            | GateOp::Aux(w) => vec![w],
            GateOp::Cnot { control, target } => vec![control, target],
        }
    }

    /// The unitary this op applies, if it is a gate.
    pub fn gate(&self) -> Option<Gate> {
        match self {
            GateOp::X(_) => Some(Gate::X),
            GateOp::Z(_) => Some(Gate::Z),
            GateOp::H(_) => Some(Gate::H),
            GateOp::P(_) => Some(Gate::P),
            GateOp::R(_) => Some(Gate::R),
            GateOp::Cnot { .. } => Some(Gate::Cnot),
            GateOp::Measure(_) | GateOp::Aux(_) => None,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateOp::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            GateOp::Aux(_) => f.write_str("AUX"),
            op => write!(f, "{} {}", op.kind().mnemonic(), op.wires()[0]),
        }
    }
}

/// An ordered list of ops over `initial_wires` starting wires.
///
/// Construct through [`Circuit::new`] (validated) or the parser.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    initial_wires: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    /// Builds and validates.
    pub fn new(initial_wires: usize, ops: Vec<GateOp>) -> Result<Self, Vec<super::Violation>> {
        let c = Self::new_unchecked(initial_wires, ops);
        super::validate(&c)?;
        Ok(c)
    }

    pub fn new_unchecked(initial_wires: usize, ops: Vec<GateOp>) -> Self {
        Self { initial_wires, ops }
    }

    pub fn empty(initial_wires: usize) -> Self {
        Self::new_unchecked(initial_wires, Vec::new())
    }

    pub fn initial_wires(&self) -> usize {
        self.initial_wires
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn final_wires(&self) -> usize {
        self.initial_wires
            + self
                .ops
                .iter()
                .filter(|op| matches!(op, GateOp::Aux(_)))
                .count()
    }

    pub fn r_gate_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, GateOp::R(_)))
            .count()
    }

    pub fn is_clifford_only(&self) -> bool {
        self.r_gate_count() == 0
    }

    /// Appends `other`, which must start from this circuit's final wire count.
    pub fn concat(&self, other: &Circuit) -> Option<Circuit> {
        (other.initial_wires == self.final_wires()).then(|| {
            let mut ops = self.ops.clone();
            ops.extend_from_slice(&other.ops);
            Circuit::new_unchecked(self.initial_wires, ops)
        })
    }

    /// Canonical text form; `parse_circuit` inverts it.
    pub fn serialize(&self) -> String {
        let mut out = format!("qubits {}\n", self.initial_wires);
        for op in &self.ops {
            out.push_str(&op.to_string());
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical text.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.serialize().as_bytes()).into()
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }
}
