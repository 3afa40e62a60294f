//! What a passive server holds after receiving every client message: the
//! padded register, all aux qubits and all classical bits, averaged over the
//! client's keys and randomness.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::choi::BlockState;
use super::joint::{Joint, Owner, Sink, WireId};
use super::SecurityError;
use crate::circuits::{validate, Circuit, GateOp};
use crate::engine::{ClientState, Message, XRule};
use crate::keytrack::{client_x_message, PauliKey, RGateRandomness};
use crate::par::{self, Execution};
use crate::qcore::{Matrix, StateVector};

/// Exhaustive averaging accepts inputs up to this many wires.
pub const EXHAUSTIVE_MAX_INPUT_WIRES: usize = 3;
/// ... and randomness spaces up to `2^16` points.
pub const EXHAUSTIVE_MAX_POINTS_LOG2: usize = 16;
/// Largest quantum part (register plus aux qubits) of a view.
pub const VIEW_MAX_QUANTUM_WIRES: usize = 8;
/// Tolerance reported for Monte Carlo audits.
pub const MONTE_CARLO_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditLevel {
    Exhaustive,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct MixednessReport {
    pub level: AuditLevel,
    /// Trace distance of each input's view from the maximally mixed state.
    pub distances: Vec<f64>,
    pub max_distance: f64,
    pub views: Vec<BlockState>,
    /// Points of client randomness averaged per input.
    pub points: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct MixednessOptions {
    pub x_rule: XRule,
    pub exec: Execution,
}

impl Default for MixednessOptions {
    fn default() -> Self {
        Self {
            x_rule: client_x_message,
            exec: Execution::default(),
        }
    }
}

pub fn audit_ciphertext_mixedness(
    circuit: &Circuit,
    inputs: &[StateVector],
    level: AuditLevel,
) -> Result<MixednessReport, SecurityError> {
    audit_ciphertext_mixedness_with(circuit, inputs, level, MixednessOptions::default())
}

pub fn audit_ciphertext_mixedness_with(
    circuit: &Circuit,
    inputs: &[StateVector],
    level: AuditLevel,
    opts: MixednessOptions,
) -> Result<MixednessReport, SecurityError> {
    let n = circuit.initial_wires();
    let r = circuit.r_gate_count();
    let target = BlockState::maximally_mixed(n + r, r);
    let mut views = Vec::with_capacity(inputs.len());
    let mut distances = Vec::with_capacity(inputs.len());
    let mut points = 0;
    for input in inputs {
        let (view, p) = server_view(circuit, input, level, opts)?;
        distances.push(view.trace_distance(&target)?);
        views.push(view);
        points = p;
    }
    Ok(MixednessReport {
        level,
        max_distance: distances.iter().copied().fold(0.0, f64::max),
        distances,
        views,
        points,
    })
}

/// One point of client randomness: `2n` key bits then `2` bits per R gate,
/// packed high to low.
fn passive_view(
    circuit: &Circuit,
    input: &StateVector,
    point: u64,
    x_rule: XRule,
) -> Result<(Vec<bool>, StateVector), SecurityError> {
    let n = circuit.initial_wires();
    let total = 2 * (n + circuit.r_gate_count());
    let bit = |i: usize| point >> (total - 1 - i) & 1 == 1;
    let keys: Vec<PauliKey> = (0..n)
        .map(|i| PauliKey::new(bit(2 * i), bit(2 * i + 1)))
        .collect();
    let mut client = ClientState::new(0).with_x_rule(x_rule);
    let Message::EncryptedRegister(mut view) = client.encrypt_with(input, &keys)? else {
        unreachable!("encrypt returns the register")
    };
    let mut xs = Vec::new();
    let mut next = 2 * n;
    for op in circuit.ops() {
        match *op {
            GateOp::R(w) => {
                let rand = RGateRandomness {
                    p: bit(next),
                    z: bit(next + 1),
                };
                next += 2;
                let (aux, x) = client.r_messages(w, rand)?;
                let (Message::AuxQubit(aux), Message::ClassicalX(x)) = (aux, x) else {
                    unreachable!("aux qubit and bit")
                };
                view = view.tensor(&aux);
                xs.push(x);
                // the passive server reports 0 for every measurement it owes
                client.finish_r(w, rand, false)?;
            }
            GateOp::Measure(w) => {
                client.record_measurement(w, false)?;
            }
            _ => client.track(op)?,
        }
    }
    Ok((xs, view))
}

/// The averaged view for one input and the number of points averaged.
pub fn server_view(
    circuit: &Circuit,
    input: &StateVector,
    level: AuditLevel,
    opts: MixednessOptions,
) -> Result<(BlockState, usize), SecurityError> {
    validate(circuit).map_err(SecurityError::InvalidCircuit)?;
    let n = circuit.initial_wires();
    if input.num_wires() != n {
        return Err(SecurityError::InputWidth {
            expected: n,
            found: input.num_wires(),
        });
    }
    let r = circuit.r_gate_count();
    let q = n + r;
    if q > VIEW_MAX_QUANTUM_WIRES {
        return Err(SecurityError::DimensionCap {
            wires: q,
            cap: VIEW_MAX_QUANTUM_WIRES,
        });
    }
    let points: Vec<u64> = match level {
        AuditLevel::Exhaustive => {
            if n > EXHAUSTIVE_MAX_INPUT_WIRES || 2 * q > EXHAUSTIVE_MAX_POINTS_LOG2 {
                return Err(SecurityError::ExhaustiveTooLarge {
                    input_wires: n,
                    bits: 2 * q,
                });
            }
            (0..1u64 << (2 * q)).collect()
        }
        AuditLevel::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mask = if 2 * q >= 64 {
                u64::MAX
            } else {
                (1u64 << (2 * q)) - 1
            };
            (0..samples).map(|_| rng.random::<u64>() & mask).collect()
        }
    };
    let weight = 1.0 / points.len() as f64;
    type Acc = Result<BTreeMap<Vec<bool>, Matrix>, SecurityError>;
    let merge = |a: Acc, b: Acc| -> Acc {
        let mut a = a?;
        for (k, m) in b? {
            match a.get_mut(&k) {
                Some(acc) => acc.add_assign_scaled(&m, 1.0),
                None => {
                    a.insert(k, m);
                }
            }
        }
        Ok(a)
    };
    let blocks = par::map_reduce_range(
        opts.exec,
        0..points.len(),
        || Ok(BTreeMap::new()),
        |i| {
            let (xs, view) = passive_view(circuit, input, points[i], opts.x_rule)?;
            let mut m = BTreeMap::new();
            m.insert(xs, view.outer().scale(crate::qcore::C64::new(weight, 0.0)));
            Ok(m)
        },
        merge,
    )?;
    Ok((BlockState::new(q, blocks), points.len()))
}

/// What the deferred-measurement client sends before hearing anything back:
/// EPR halves for the register and aux qubits, and uniform bits. `None`
/// builds the simulator's stream, which never touches an input.
pub fn deferred_message_view(
    circuit: &Circuit,
    input: Option<&StateVector>,
) -> Result<BlockState, SecurityError> {
    validate(circuit).map_err(SecurityError::InvalidCircuit)?;
    let mut joint = Joint::new(Execution::Sequential);
    if let Some(input) = input {
        joint.alloc_state(Owner::Client, input)?;
    }
    let mut sent: Vec<WireId> = Vec::new();
    for _ in 0..circuit.initial_wires() {
        let (_, half) = joint.alloc_epr(Owner::Client, Owner::Server)?;
        sent.push(half);
    }
    for _ in 0..circuit.r_gate_count() {
        joint.flip_coins(1, Sink::Record);
        let (aux, _) = joint.alloc_epr(Owner::Server, Owner::Client)?;
        sent.push(aux);
    }
    let blocks = joint.blocks(&sent, |w| w.record.clone())?;
    Ok(BlockState::new(sent.len(), blocks))
}
