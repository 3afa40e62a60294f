//! Joint-state execution of the delegation protocol in its three client
//! variants, and of the simulator that replaces the client.
//!
//! * [`Protocol::One`]: the client pads with random keys and prepares each aux
//!   qubit directly.
//! * [`Protocol::Two`]: the pad comes from teleporting the input through EPR
//!   pairs and each aux qubit from measuring half of an EPR pair; the bit sent
//!   for an R gate is uniform.
//! * [`Protocol::Three`]: as `Two`, but every client measurement waits until
//!   the output register is back.
//!
//! The server side is the same in all cases, including the simulated one.

use std::collections::BTreeMap;

use super::joint::{Joint, Owner, Sink, WireId, World};
use super::strategy::{Action, Hook, ServerStrategy, WireRef};
use super::SecurityError;
use crate::circuits::{validate, Circuit, GateOp};
use crate::engine::{MessageKind, XRule};
use crate::keytrack::{
    client_x_message, update_cnot, update_h, update_p, update_r, KeyRegister, PauliKey,
    RGateRandomness,
};
use crate::par::Execution;
use crate::qcore::{DensityMatrix, Gate, Matrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    One,
    Two,
    Three,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::One, Protocol::Two, Protocol::Three];
}

/// Who talks to the server.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClientMode {
    Real(Protocol),
    Simulated,
}

#[derive(Clone, Copy, Debug)]
pub struct JointOptions {
    pub mode: ClientMode,
    /// Only the first protocol computes its bit from the key.
    pub x_rule: XRule,
    pub exec: Execution,
}

impl JointOptions {
    pub fn new(mode: ClientMode) -> Self {
        Self {
            mode,
            x_rule: client_x_message,
            exec: Execution::default(),
        }
    }
}

fn gate(g: Gate) -> Matrix {
    g.matrix().into_matrix()
}

fn key_of(w: &World, wire: usize) -> PauliKey {
    w.client
        .keys
        .get(wire)
        .expect("client tracks every live wire")
}

/// Client bookkeeping for one R gate.
#[derive(Clone, Copy, Debug)]
struct RSlot {
    wire: usize,
    x: usize,
    c: usize,
    /// Client bits holding `(y, d)` for the first protocol, `d` otherwise.
    rand: usize,
    /// Client half of the EPR pair when the measurement is deferred.
    half: Option<WireId>,
}

/// The server's register and everything it controls.
struct Server {
    data: Vec<WireId>,
    prior: Vec<WireId>,
    ancillas: Vec<WireId>,
    aux: Option<WireId>,
}

pub(crate) struct Runner<'a> {
    pub(crate) joint: Joint,
    circuit: &'a Circuit,
    strategy: &'a ServerStrategy,
    opts: JointOptions,
    server: Server,
    r_slots: Vec<RSlot>,
    reports: BTreeMap<usize, usize>,
    deferred_teleports: Vec<(WireId, WireId)>,
    pub(crate) kinds: Vec<MessageKind>,
}

/// What a finished joint run exposes.
pub(crate) struct Finished {
    pub(crate) joint: Joint,
    pub(crate) data: Vec<WireId>,
    pub(crate) prior: Vec<WireId>,
    pub(crate) ancillas: Vec<WireId>,
    pub(crate) kinds: Vec<MessageKind>,
}

impl<'a> Runner<'a> {
    pub(crate) fn new(
        joint: Joint,
        circuit: &'a Circuit,
        strategy: &'a ServerStrategy,
        opts: JointOptions,
        prior: Vec<WireId>,
    ) -> Result<Self, SecurityError> {
        validate(circuit).map_err(SecurityError::InvalidCircuit)?;
        if prior.len() != strategy.prior_width() {
            return Err(SecurityError::BadStrategy(format!(
                "strategy `{}` expects {} prior wire(s), got {}",
                strategy.name(),
                strategy.prior_width(),
                prior.len()
            )));
        }
        Ok(Self {
            joint,
            circuit,
            strategy,
            opts,
            server: Server {
                data: Vec::new(),
                prior,
                ancillas: Vec::new(),
                aux: None,
            },
            r_slots: Vec::new(),
            reports: BTreeMap::new(),
            deferred_teleports: Vec::new(),
            kinds: Vec::new(),
        })
    }

    fn real(&self) -> Option<Protocol> {
        match self.opts.mode {
            ClientMode::Real(p) => Some(p),
            ClientMode::Simulated => None,
        }
    }

    /// Whether the client tracks keys while the server works.
    fn tracks_inline(&self) -> bool {
        matches!(self.real(), Some(Protocol::One | Protocol::Two))
    }

    pub(crate) fn run(mut self, inputs: &[WireId]) -> Result<Finished, SecurityError> {
        if inputs.len() != self.circuit.initial_wires() {
            return Err(SecurityError::InputWidth {
                expected: self.circuit.initial_wires(),
                found: inputs.len(),
            });
        }
        self.send_register(inputs)?;
        self.hook(Hook::AfterReceiveRegister)?;
        let ops = self.circuit.ops().to_vec();
        for (i, op) in ops.iter().enumerate() {
            self.hook(Hook::BeforeOp(i))?;
            self.step(i, op)?;
            self.hook(Hook::AfterOp(i))?;
        }
        self.hook(Hook::BeforeReturn)?;
        for &w in &self.server.data {
            self.joint.transfer(w, Owner::Client);
        }
        self.kinds.push(MessageKind::OutputRegister);
        if self.real() == Some(Protocol::Three) {
            self.deferred_client()?;
        }
        if self.real().is_some() {
            self.decrypt()?;
        }
        Ok(Finished {
            joint: self.joint,
            data: self.server.data,
            prior: self.server.prior,
            ancillas: self.server.ancillas,
            kinds: self.kinds,
        })
    }

    fn send_register(&mut self, inputs: &[WireId]) -> Result<(), SecurityError> {
        self.kinds.push(MessageKind::EncryptedRegister);
        match self.real() {
            Some(Protocol::One) => {
                let n = inputs.len();
                let first = self.joint.flip_coins(2 * n, Sink::Client);
                self.joint.update_client(|w| {
                    let keys: Vec<PauliKey> = (0..n)
                        .map(|i| {
                            PauliKey::new(
                                w.client.bits[first + 2 * i],
                                w.client.bits[first + 2 * i + 1],
                            )
                        })
                        .collect();
                    w.client.keys = KeyRegister::from_keys(&keys);
                    Ok(())
                })?;
                for (i, &q) in inputs.iter().enumerate() {
                    let (xb, zb) = (first + 2 * i, first + 2 * i + 1);
                    self.joint
                        .apply_with(&[q], |w| w.client.bits[zb].then(|| gate(Gate::Z)));
                    self.joint
                        .apply_with(&[q], |w| w.client.bits[xb].then(|| gate(Gate::X)));
                    self.joint.transfer(q, Owner::Server);
                }
                self.server.data = inputs.to_vec();
            }
            mode => {
                let mut pairs = Vec::new();
                for &q in inputs {
                    let (ec, es) = self.joint.alloc_epr(Owner::Client, Owner::Client)?;
                    self.joint.transfer(es, Owner::Server);
                    self.server.data.push(es);
                    pairs.push((q, ec));
                }
                match mode {
                    Some(Protocol::Two) => self.teleport_measure(&pairs)?,
                    Some(Protocol::Three) => self.deferred_teleports = pairs,
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Bell measurement of each input with the client's EPR half: the half
    /// gives the X key, the input the Z key.
    fn teleport_measure(&mut self, pairs: &[(WireId, WireId)]) -> Result<(), SecurityError> {
        let mut bits = Vec::new();
        for &(q, ec) in pairs {
            self.joint.apply(&gate(Gate::Cnot), &[q, ec]);
            self.joint.apply(&gate(Gate::H), &[q]);
            let a = self.joint.measure(ec, Sink::Client, false)?;
            let b = self.joint.measure(q, Sink::Client, false)?;
            bits.push((a, b));
        }
        self.joint.update_client(|w| {
            let keys: Vec<PauliKey> = bits
                .iter()
                .map(|&(a, b)| PauliKey::new(w.client.bits[a], w.client.bits[b]))
                .collect();
            w.client.keys = KeyRegister::from_keys(&keys);
            Ok(())
        })
    }

    fn resolve(&self, r: WireRef) -> Result<WireId, SecurityError> {
        let missing = || {
            SecurityError::BadStrategy(format!(
                "strategy `{}` names missing wire {r:?}",
                self.strategy.name()
            ))
        };
        match r {
            WireRef::Data(k) => self.server.data.get(k).copied().ok_or_else(missing),
            WireRef::Prior(j) => self.server.prior.get(j).copied().ok_or_else(missing),
            WireRef::Ancilla(j) => self.server.ancillas.get(j).copied().ok_or_else(missing),
            WireRef::Aux => self.server.aux.ok_or_else(missing),
        }
    }

    fn hook(&mut self, hook: Hook) -> Result<(), SecurityError> {
        let actions: Vec<Action> = self.strategy.actions_at(hook).cloned().collect();
        for action in actions {
            match action {
                Action::AllocAncilla => {
                    let a = self.joint.alloc_zero(Owner::Server)?;
                    self.server.ancillas.push(a);
                }
                Action::Measure(r) => {
                    let w = self.resolve(r)?;
                    self.joint.measure(w, Sink::Record, true)?;
                }
                Action::Unitary { matrix, wires } => {
                    let ids: Vec<WireId> = wires
                        .iter()
                        .map(|&r| self.resolve(r))
                        .collect::<Result<_, _>>()?;
                    if matrix.dim() != 1 << ids.len() || !matrix.is_unitary(1e-9) {
                        return Err(SecurityError::BadStrategy(format!(
                            "strategy `{}` has a bad {}-wire unitary",
                            self.strategy.name(),
                            ids.len()
                        )));
                    }
                    self.joint.apply(&matrix, &ids);
                }
            }
        }
        Ok(())
    }

    fn step(&mut self, index: usize, op: &GateOp) -> Result<(), SecurityError> {
        match *op {
            GateOp::Aux(w) => {
                let q = self.joint.alloc_zero(Owner::Server)?;
                self.server.data.push(q);
                if self.tracks_inline() {
                    self.joint.update_client(move |world| {
                        world.client.keys.add_aux(w);
                        Ok(())
                    })?;
                }
            }
            GateOp::Measure(w) => {
                let bit = self
                    .joint
                    .measure(self.server.data[w], Sink::Record, true)?;
                self.reports.insert(index, bit);
                self.kinds.push(MessageKind::ReportedMeasurement);
                if self.tracks_inline() {
                    self.joint
                        .update_client(move |world| client_measure(world, w, bit))?;
                }
            }
            GateOp::R(w) => self.r_gate(w)?,
            _ => {
                let g = op.gate().expect("unitary op");
                let ids: Vec<WireId> = op.wires().iter().map(|&k| self.server.data[k]).collect();
                self.joint.apply(&g.matrix().into_matrix(), &ids);
                if self.tracks_inline() {
                    let op = *op;
                    self.joint
                        .update_client(move |world| client_clifford(world, &op))?;
                }
            }
        }
        Ok(())
    }

    fn r_gate(&mut self, wire: usize) -> Result<(), SecurityError> {
        let r_index = self.r_slots.len();
        let (aux, slot_rand, x, half) = match self.real() {
            Some(Protocol::One) => {
                let rand = self.joint.flip_coins(2, Sink::Client);
                let aux = self.joint.alloc(Owner::Client, &StateVector::plus())?;
                self.joint
                    .apply_with(&[aux], |w| w.client.bits[rand].then(|| gate(Gate::P)));
                self.joint
                    .apply_with(&[aux], |w| w.client.bits[rand + 1].then(|| gate(Gate::Z)));
                let rule = self.opts.x_rule;
                let x = self.joint.push_bit(Sink::Record, move |w| {
                    rule(key_of(w, wire), randomness(w, rand))
                });
                (aux, rand, x, None)
            }
            mode => {
                let x = self.joint.flip_coins(1, Sink::Record);
                let (aux, keep) = self.joint.alloc_epr(Owner::Client, Owner::Client)?;
                match mode {
                    Some(Protocol::Two) => {
                        let d = self.prepare_aux(keep, wire, x)?;
                        (aux, d, x, None)
                    }
                    Some(Protocol::Three) => (aux, 0, x, Some(keep)),
                    _ => (aux, 0, x, None),
                }
            }
        };
        self.joint.transfer(aux, Owner::Server);
        self.kinds.push(MessageKind::AuxQubit);
        self.kinds.push(MessageKind::ClassicalX);
        self.server.aux = Some(aux);
        self.hook(Hook::AfterReceiveAux(r_index))?;

        // server gadget
        let data = self.server.data[wire];
        self.joint.apply(&gate(Gate::R), &[data]);
        self.joint.apply(&gate(Gate::Cnot), &[aux, data]);
        let c = self.joint.measure(data, Sink::Record, false)?;
        self.joint
            .apply_with(&[aux], |w| w.record[x].then(|| gate(Gate::P)));
        self.server.data[wire] = aux;
        self.server.aux = None;
        self.kinds.push(MessageKind::ClassicalC);

        let slot = RSlot {
            wire,
            x,
            c,
            rand: slot_rand,
            half,
        };
        self.r_slots.push(slot);
        match self.real() {
            Some(Protocol::One) => self.joint.update_client(move |w| {
                let key = key_of(w, wire);
                w.client
                    .keys
                    .set(wire, update_r(key, randomness(w, slot.rand), w.record[c]));
                Ok(())
            })?,
            Some(Protocol::Two) => self
                .joint
                .update_client(move |w| finish_entangled_r(w, slot))?,
            _ => {}
        }
        Ok(())
    }

    /// Measures the client's EPR half in the basis that leaves `Z^d P^y|+⟩`
    /// on the sent half, with `y = a ⊕ x`. Returns the client bit holding `d`.
    fn prepare_aux(&mut self, keep: WireId, wire: usize, x: usize) -> Result<usize, SecurityError> {
        self.joint.apply_with(&[keep], |w| {
            (key_of(w, wire).x ^ w.record[x]).then(|| gate(Gate::P))
        });
        self.joint.apply(&gate(Gate::H), &[keep]);
        self.joint.measure(keep, Sink::Client, false)
    }

    /// Everything the last protocol postpones: teleportation measurements,
    /// then a replay of the circuit's key updates with the deferred R-gate
    /// measurements in order.
    fn deferred_client(&mut self) -> Result<(), SecurityError> {
        let pairs = std::mem::take(&mut self.deferred_teleports);
        self.teleport_measure(&pairs)?;
        let slots = self.r_slots.clone();
        let mut r = 0;
        for (i, op) in self.circuit.ops().iter().enumerate() {
            match *op {
                GateOp::Aux(w) => self.joint.update_client(move |world| {
                    world.client.keys.add_aux(w);
                    Ok(())
                })?,
                GateOp::Measure(w) => {
                    let bit = self.reports[&i];
                    self.joint
                        .update_client(move |world| client_measure(world, w, bit))?;
                }
                GateOp::R(w) => {
                    let mut slot = slots[r];
                    r += 1;
                    let keep = slot.half.expect("deferred half recorded");
                    slot.rand = self.prepare_aux(keep, w, slot.x)?;
                    self.joint
                        .update_client(move |world| finish_entangled_r(world, slot))?;
                }
                _ => {
                    let op = *op;
                    self.joint
                        .update_client(move |world| client_clifford(world, &op))?;
                }
            }
        }
        Ok(())
    }

    /// Undoes the pad on the returned register: `Z^z X^x` on quantum wires,
    /// `X^x` on measured ones.
    fn decrypt(&mut self) -> Result<(), SecurityError> {
        for (k, &q) in self.server.data.clone().iter().enumerate() {
            self.joint.apply_with(&[q], move |w| {
                let x = match w.client.keys.classical().get(&k) {
                    Some(&x) => x,
                    None => key_of(w, k).x,
                };
                x.then(|| gate(Gate::X))
            });
            self.joint.apply_with(&[q], move |w| {
                (!w.client.keys.is_classical(k) && key_of(w, k).z).then(|| gate(Gate::Z))
            });
        }
        Ok(())
    }
}

fn randomness(w: &World, first: usize) -> RGateRandomness {
    RGateRandomness {
        p: w.client.bits[first],
        z: w.client.bits[first + 1],
    }
}

fn client_clifford(w: &mut World, op: &GateOp) -> Result<(), SecurityError> {
    let keys = &mut w.client.keys;
    match *op {
        GateOp::H(q) => keys.set(q, update_h(keys.get(q)?)),
        GateOp::P(q) => keys.set(q, update_p(keys.get(q)?)),
        GateOp::Cnot { control, target } => {
            let (c, t) = update_cnot(keys.get(control)?, keys.get(target)?);
            keys.set(control, c);
            keys.set(target, t);
        }
        _ => {}
    }
    Ok(())
}

fn client_measure(w: &mut World, wire: usize, report_bit: usize) -> Result<(), SecurityError> {
    let reported = w.record[report_bit];
    let plain = w.client.keys.measure(wire, reported)?;
    w.client.plain.insert(wire, plain);
    Ok(())
}

fn finish_entangled_r(w: &mut World, slot: RSlot) -> Result<(), SecurityError> {
    let key = w.client.keys.get(slot.wire)?;
    let rand = RGateRandomness {
        p: key.x ^ w.record[slot.x],
        z: w.client.bits[slot.rand],
    };
    w.client
        .keys
        .set(slot.wire, update_r(key, rand, w.record[slot.c]));
    Ok(())
}

/// One sampled run of a protocol variant on a concrete input.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    /// The client's decrypted register.
    pub output: DensityMatrix,
    pub plaintext_bits: BTreeMap<usize, bool>,
    /// Message kinds in the order sent.
    pub transcript: Vec<MessageKind>,
    /// Classical bits the server saw or produced.
    pub server_record: Vec<bool>,
    pub final_keys: KeyRegister,
}

impl ProtocolRun {
    /// The output as a pure state, when it is one.
    pub fn output_state(&self) -> Option<StateVector> {
        let m = self.output.matrix();
        let d = m.dim();
        let j = (0..d).max_by(|&a, &b| m.get(a, a).re.total_cmp(&m.get(b, b).re))?;
        let pivot = m.get(j, j).re;
        if (self.output.matrix().mul(m).trace().re - 1.0).abs() > 1e-9 || pivot <= 0.0 {
            return None;
        }
        let amps = (0..d).map(|i| m.get(i, j) / pivot.sqrt()).collect();
        StateVector::new(self.output.num_wires(), amps).ok()
    }
}

/// One sampled run against a scripted server. Strategies with a prior
/// register get it in `|0…0⟩`.
pub fn run_protocol_with(
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
    protocol: Protocol,
    strategy: &ServerStrategy,
) -> Result<ProtocolRun, SecurityError> {
    let mut joint = Joint::sampling(seed);
    let inputs = joint.alloc_state(Owner::Client, input)?;
    let prior = (0..strategy.prior_width())
        .map(|_| joint.alloc_zero(Owner::Server))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = JointOptions {
        exec: Execution::Sequential,
        ..JointOptions::new(ClientMode::Real(protocol))
    };
    let done = Runner::new(joint, circuit, strategy, opts, prior)?.run(&inputs)?;
    let world = &done.joint.worlds()[0];
    let pos: Vec<usize> = done.data.iter().map(|&w| done.joint.position(w)).collect();
    let rho = world.state.reduced_density(&pos)?;
    Ok(ProtocolRun {
        output: DensityMatrix::new(done.data.len(), rho)?,
        plaintext_bits: world.client.plain.clone(),
        transcript: done.kinds,
        server_record: world.record.clone(),
        final_keys: world.client.keys.clone(),
    })
}

pub fn run_protocol1(
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
) -> Result<ProtocolRun, SecurityError> {
    run_protocol_with(
        circuit,
        input,
        seed,
        Protocol::One,
        &ServerStrategy::honest(),
    )
}

/// Teleportation-based padding and EPR-based aux preparation.
pub fn run_protocol2(
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
) -> Result<ProtocolRun, SecurityError> {
    run_protocol_with(
        circuit,
        input,
        seed,
        Protocol::Two,
        &ServerStrategy::honest(),
    )
}

/// As [`run_protocol2`] with every client measurement after the output returns.
pub fn run_protocol3(
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
) -> Result<ProtocolRun, SecurityError> {
    run_protocol_with(
        circuit,
        input,
        seed,
        Protocol::Three,
        &ServerStrategy::honest(),
    )
}

/// The aux preparation of the variant where the client picks the classical
/// bit `x` uniformly and derives `y = a ⊕ x`.
pub fn intermediate_r_randomness(a: bool, x: bool, d: bool) -> RGateRandomness {
    RGateRandomness { p: a ^ x, z: d }
}

/// Runs one R gate with the uniform-`x` client on `psi` padded with `key`,
/// forcing the server outcome `c`. Returns the server's register and the
/// client's updated key.
pub fn run_intermediate_r(
    psi: &StateVector,
    key: PauliKey,
    x: bool,
    d: bool,
    c: bool,
) -> Result<(StateVector, PauliKey), SecurityError> {
    use crate::engine::{aux_qubit_state, OutcomeSource, ServerState};
    let rand = intermediate_r_randomness(key.x, x, d);
    let cipher = crate::qcore::qotp_encrypt(psi, &[key])?;
    let mut server = ServerState::new(cipher, OutcomeSource::scripted(vec![c]));
    server.receive_aux(aux_qubit_state(rand));
    server.run_r(0, x)?;
    Ok((server.into_register(), update_r(key, rand, c)))
}

/// One message the simulator emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMessage {
    /// Half of an EPR pair standing in for padded input wire `k`.
    RegisterHalf(usize),
    /// Half of an EPR pair standing in for the aux qubit of R gate `r`.
    AuxHalf(usize),
    /// A uniform bit standing in for the classical message of R gate `r`.
    UniformBit(usize),
}

/// The client stand-in: never sees the input, never measures, ignores replies.
#[derive(Clone, Debug)]
pub struct Simulator {
    circuit: Circuit,
    messages: Vec<SimMessage>,
}

pub fn build_simulator(circuit: &Circuit) -> Result<Simulator, SecurityError> {
    validate(circuit).map_err(SecurityError::InvalidCircuit)?;
    let mut messages: Vec<SimMessage> = (0..circuit.initial_wires())
        .map(SimMessage::RegisterHalf)
        .collect();
    for r in 0..circuit.r_gate_count() {
        messages.push(SimMessage::AuxHalf(r));
        messages.push(SimMessage::UniformBit(r));
    }
    Ok(Simulator {
        circuit: circuit.clone(),
        messages,
    })
}

impl Simulator {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn messages(&self) -> &[SimMessage] {
        &self.messages
    }
}
