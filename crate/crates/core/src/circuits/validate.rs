use std::fmt;

use super::ir::{Circuit, GateOp};

/// A broken circuit invariant; `op` is the zero-based position in the op list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WireNotAllocated {
        op: usize,
        wire: usize,
    },
    WireMeasured {
        op: usize,
        wire: usize,
    },
    DuplicateWires {
        op: usize,
        wire: usize,
    },
    AuxIndex {
        op: usize,
        expected: usize,
        found: usize,
    },
}

impl Violation {
    pub fn op_index(&self) -> usize {
        match *self {
            Violation::WireNotAllocated { op, .. }
            | Violation::WireMeasured { op, .. }
            | Violation::DuplicateWires { op, .. }
            | Violation::AuxIndex { op, .. } => op,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WireNotAllocated { wire, .. } => write!(f, "wire {wire} is not allocated"),
            Violation::WireMeasured { wire, .. } => write!(f, "wire {wire} already measured"),
            Violation::DuplicateWires { wire, .. } => {
                write!(f, "duplicate wires: {wire} used twice")
            }
            Violation::AuxIndex {
                expected, found, ..
            } => write!(f, "AUX must allocate wire {expected}, not {found}"),
        }
    }
}

/// Tracks which wires exist and which have been measured while walking ops.
#[derive(Clone, Debug)]
pub(crate) struct Liveness {
    allocated: usize,
    measured: Vec<bool>,
}

impl Liveness {
    pub(crate) fn new(initial_wires: usize) -> Self {
        Self {
            allocated: initial_wires,
            measured: vec![false; initial_wires],
        }
    }

    pub(crate) fn allocated(&self) -> usize {
        self.allocated
    }

    pub(crate) fn check_live(&self, op: usize, wire: usize) -> Result<(), Violation> {
        if wire >= self.allocated {
            Err(Violation::WireNotAllocated { op, wire })
        } else if self.measured[wire] {
            Err(Violation::WireMeasured { op, wire })
        } else {
            Ok(())
        }
    }

    /// Checks one op and records its effect.
    pub(crate) fn step(&mut self, index: usize, op: &GateOp) -> Result<(), Violation> {
        match *op {
            GateOp::Aux(w) => {
                if w != self.allocated {
                    return Err(Violation::AuxIndex {
                        op: index,
                        expected: self.allocated,
                        found: w,
                    });
                }
                self.allocated += 1;
                self.measured.push(false);
            }
            GateOp::Cnot { control, target } => {
                self.check_live(index, control)?;
                self.check_live(index, target)?;
                if control == target {
                    return Err(Violation::DuplicateWires {
                        op: index,
                        wire: control,
                    });
                }
            }
            GateOp::Measure(w) => {
                self.check_live(index, w)?;
                self.measured[w] = true;
            }
            GateOp::X(w) | GateOp::Z(w) | GateOp::H(w) | GateOp::P(w) | GateOp::R(w) => {
                self.check_live(index, w)?;
            }
        }
        Ok(())
    }

    pub(crate) fn live_wires(&self) -> Vec<usize> {
        (0..self.allocated).filter(|&w| !self.measured[w]).collect()
    }
}

/// Checks liveness, arity and AUX numbering. Ops after a violation are still
/// checked against the state reached so far.
pub fn validate(circuit: &Circuit) -> Result<(), Vec<Violation>> {
    let mut live = Liveness::new(circuit.initial_wires());
    let mut violations = Vec::new();
    for (i, op) in circuit.ops().iter().enumerate() {
        if let Err(v) = live.step(i, op) {
            // keep AUX numbering in sync so one bad AUX does not cascade
            if let GateOp::Aux(_) = op {
                live.allocated += 1;
                live.measured.push(false);
            }
            violations.push(v);
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
