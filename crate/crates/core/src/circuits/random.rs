//! Seeded random circuits for sweeps and property checks.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::ir::{Circuit, GateOp, OpKind};
use super::validate::Liveness;

/// Shape limits for [`random_circuit`].
#[derive(Clone, Copy, Debug)]
pub struct RandomCircuitSpec {
    pub max_initial_wires: usize,
    pub max_ops: usize,
    /// AUX is skipped once this many wires exist.
    pub max_total_wires: usize,
}

impl Default for RandomCircuitSpec {
    fn default() -> Self {
        Self {
            max_initial_wires: 5,
            max_ops: 40,
            max_total_wires: 9,
        }
    }
}

/// Draws a valid circuit with op kinds sampled uniformly; kinds that cannot be
/// placed (e.g. CNOT with fewer than two live wires) are redrawn. The circuit
/// ends early once no op can be placed at all.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, spec: RandomCircuitSpec) -> Circuit {
    let initial = rng.random_range(1..=spec.max_initial_wires.max(1));
    let len = rng.random_range(0..=spec.max_ops);
    let mut live = Liveness::new(initial);
    let mut ops = Vec::with_capacity(len);
    while ops.len() < len {
        let wires = live.live_wires();
        // every wire measured and no room for AUX: nothing more can be placed
        if wires.is_empty() && live.allocated() >= spec.max_total_wires {
            break;
        }
        let kind = *OpKind::ALL.choose(rng).expect("non-empty");
        let op = match kind {
            OpKind::Aux if live.allocated() < spec.max_total_wires => GateOp::Aux(live.allocated()),
            OpKind::Aux => continue,
            OpKind::Cnot if wires.len() >= 2 => {
                let picked: Vec<usize> = wires.choose_multiple(rng, 2).copied().collect();
                GateOp::Cnot {
                    control: picked[0],
                    target: picked[1],
                }
            }
            OpKind::Cnot => continue,
            _ if wires.is_empty() => continue,
            _ => {
                let w = *wires.choose(rng).expect("non-empty");
                match kind {
                    OpKind::X => GateOp::X(w),
                    OpKind::Z => GateOp::Z(w),
                    OpKind::H => GateOp::H(w),
                    OpKind::P => GateOp::P(w),
                    OpKind::R => GateOp::R(w),
                    OpKind::Measure => GateOp::Measure(w),
                    OpKind::Cnot | OpKind::Aux => unreachable!(),
                }
            }
        };
        live.step(ops.len(), &op)
            .expect("generator only emits live wires");
        ops.push(op);
    }
    Circuit::new_unchecked(initial, ops)
}
