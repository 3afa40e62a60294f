//! Client and server state for one delegation run.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::message::Message;
use super::EngineError;
use crate::circuits::GateOp;
use crate::keytrack::{
    client_x_message, update_cnot, update_h, update_p, update_r, update_x, update_z, KeyRegister,
    PauliKey, RGateRandomness,
};
use crate::qcore::{
    measure_branches, measure_sample, p_power, qotp_decrypt, qotp_encrypt, Gate, StateVector,
    IMPOSSIBLE,
};

/// Computes the classical bit sent alongside the aux qubit. The honest rule is
/// [`client_x_message`]; other rules exist only to test the audits.
pub type XRule = fn(PauliKey, RGateRandomness) -> bool;

/// Independent client/server generators derived from one seed.
pub(crate) fn client_rng(seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

pub(crate) fn server_rng(seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// `Z^z P^p |+⟩`: one of the four equatorial states.
pub fn aux_qubit_state(rand: RGateRandomness) -> StateVector {
    let mut s = StateVector::plus();
    if rand.p {
        s.apply_matrix_mut(Gate::P.matrix().matrix(), &[0]);
    }
    if rand.z {
        s.apply_matrix_mut(Gate::Z.matrix().matrix(), &[0]);
    }
    s
}

/// The client's secret state. Keys never leave this struct.
#[derive(Clone, Debug)]
pub struct ClientState {
    keys: KeyRegister,
    randomness: Vec<RGateRandomness>,
    rng: ChaCha20Rng,
    x_rule: XRule,
}

impl ClientState {
    pub fn new(seed: u64) -> Self {
        Self {
            keys: KeyRegister::default(),
            randomness: Vec::new(),
            rng: client_rng(seed),
            x_rule: client_x_message,
        }
    }

    pub fn with_x_rule(mut self, rule: XRule) -> Self {
        self.x_rule = rule;
        self
    }

    pub fn keys(&self) -> &KeyRegister {
        &self.keys
    }

    pub fn randomness_log(&self) -> &[RGateRandomness] {
        &self.randomness
    }

    /// Draws fresh keys and pads the input.
    pub fn encrypt(&mut self, input: &StateVector) -> Result<Message, EngineError> {
        let keys: Vec<PauliKey> = (0..input.num_wires())
            .map(|_| PauliKey::random(&mut self.rng))
            .collect();
        self.encrypt_with(input, &keys)
    }

    pub fn encrypt_with(
        &mut self,
        input: &StateVector,
        keys: &[PauliKey],
    ) -> Result<Message, EngineError> {
        let cipher = qotp_encrypt(input, keys)?;
        self.keys = KeyRegister::from_keys(keys);
        Ok(Message::EncryptedRegister(cipher))
    }

    pub fn draw_r_randomness(&mut self) -> RGateRandomness {
        RGateRandomness::random(&mut self.rng)
    }

    /// Key update for a non-interactive op (Clifford gates and AUX).
    pub fn track(&mut self, op: &GateOp) -> Result<(), EngineError> {
        match *op {
            GateOp::X(w) => self.keys.set(w, update_x(self.keys.get(w)?)),
            GateOp::Z(w) => self.keys.set(w, update_z(self.keys.get(w)?)),
            GateOp::H(w) => self.keys.set(w, update_h(self.keys.get(w)?)),
            GateOp::P(w) => self.keys.set(w, update_p(self.keys.get(w)?)),
            GateOp::Cnot { control, target } => {
                let (c, t) = update_cnot(self.keys.get(control)?, self.keys.get(target)?);
                self.keys.set(control, c);
                self.keys.set(target, t);
            }
            GateOp::Aux(w) => self.keys.add_aux(w),
            GateOp::R(_) | GateOp::Measure(_) => {
                return Err(EngineError::Protocol(format!("{op} is interactive")))
            }
        }
        Ok(())
    }

    /// The aux qubit and classical bit for an R gate on `wire`.
    pub fn r_messages(
        &mut self,
        wire: usize,
        rand: RGateRandomness,
    ) -> Result<(Message, Message), EngineError> {
        let key = self.keys.get(wire)?;
        self.randomness.push(rand);
        Ok((
            Message::AuxQubit(aux_qubit_state(rand)),
            Message::ClassicalX((self.x_rule)(key, rand)),
        ))
    }

    pub fn finish_r(
        &mut self,
        wire: usize,
        rand: RGateRandomness,
        c: bool,
    ) -> Result<(), EngineError> {
        let key = self.keys.get(wire)?;
        self.keys.set(wire, update_r(key, rand, c));
        Ok(())
    }

    /// Decodes a reported measurement and retires the wire's quantum key.
    pub fn record_measurement(&mut self, wire: usize, reported: bool) -> Result<bool, EngineError> {
        Ok(self.keys.measure(wire, reported)?)
    }

    pub fn decrypt(&self, output: &StateVector) -> Result<StateVector, EngineError> {
        decrypt_output(output, &self.keys)
    }
}

/// Removes the pad: `Z^z X^x` per quantum wire and `X^x` per measured wire.
pub fn decrypt_output(
    output: &StateVector,
    keys: &KeyRegister,
) -> Result<StateVector, EngineError> {
    let dense = keys.dense(output.num_wires())?;
    if keys.quantum().len() + keys.classical().len() != output.num_wires() {
        return Err(EngineError::KeyMismatch {
            keys: keys.quantum().len() + keys.classical().len(),
            wires: output.num_wires(),
        });
    }
    Ok(qotp_decrypt(output, &dense)?)
}

/// Where the server's measurement outcomes come from.
#[derive(Clone, Debug)]
pub enum OutcomeSource {
    Sampled(Box<ChaCha20Rng>),
    /// Follows `script`; past its end, picks 0 unless 0 is impossible.
    Scripted {
        script: Vec<bool>,
        log: Vec<OutcomeRecord>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeRecord {
    pub bit: bool,
    pub probability: f64,
    /// Whether the other outcome had non-negligible probability.
    pub other_possible: bool,
}

impl OutcomeSource {
    pub fn sampled(seed: u64) -> Self {
        OutcomeSource::Sampled(Box::new(server_rng(seed)))
    }

    pub fn scripted(script: Vec<bool>) -> Self {
        OutcomeSource::Scripted {
            script,
            log: Vec::new(),
        }
    }

    pub fn log(&self) -> &[OutcomeRecord] {
        match self {
            OutcomeSource::Sampled(_) => &[],
            OutcomeSource::Scripted { log, .. } => log,
        }
    }

    fn measure(
        &mut self,
        state: &StateVector,
        wire: usize,
    ) -> Result<(bool, StateVector), EngineError> {
        match self {
            OutcomeSource::Sampled(rng) => Ok(measure_sample(state, wire, rng.as_mut())?),
            OutcomeSource::Scripted { script, log } => {
                let [zero, one] = measure_branches(state, wire)?;
                let pos = log.len();
                let wanted = script.get(pos).copied().unwrap_or(zero.state.is_none());
                let (pick, other) = if wanted { (one, zero) } else { (zero, one) };
                let post = pick.state.ok_or(EngineError::ImpossibleBranch)?;
                log.push(OutcomeRecord {
                    bit: pick.bit,
                    probability: pick.probability,
                    other_possible: other.probability >= IMPOSSIBLE,
                });
                Ok((pick.bit, post))
            }
        }
    }
}

/// The server's register: ciphertext only, indexed by logical wire.
#[derive(Clone, Debug)]
pub struct ServerState {
    register: StateVector,
    outcomes: OutcomeSource,
    pending_aux: Vec<StateVector>,
}

impl ServerState {
    pub fn new(register: StateVector, outcomes: OutcomeSource) -> Self {
        Self {
            register,
            outcomes,
            pending_aux: Vec::new(),
        }
    }

    pub fn register(&self) -> &StateVector {
        &self.register
    }

    pub fn outcomes(&self) -> &OutcomeSource {
        &self.outcomes
    }

    pub fn into_register(self) -> StateVector {
        self.register
    }

    /// Applies a Clifford gate to the ciphertext; emits nothing.
    pub fn apply_clifford(&mut self, op: &GateOp) -> Result<(), EngineError> {
        let gate = match op.gate() {
            Some(g) if op.kind().is_clifford() => g,
            _ => {
                return Err(EngineError::Protocol(format!(
                    "{op} is not a Clifford gate"
                )))
            }
        };
        self.register = self
            .register
            .apply_matrix(gate.matrix().matrix(), &op.wires())?;
        Ok(())
    }

    pub fn add_aux(&mut self) -> Result<(), EngineError> {
        self.register = self.register.append_wire(&StateVector::zero(1)?)?;
        Ok(())
    }

    /// Measures a ciphertext wire in place; the report is the raw outcome.
    pub fn measure(&mut self, wire: usize) -> Result<Message, EngineError> {
        let (bit, post) = self.outcomes.measure(&self.register, wire)?;
        self.register = post;
        Ok(Message::ReportedMeasurement(bit))
    }

    pub fn has_pending_aux(&self) -> bool {
        !self.pending_aux.is_empty()
    }

    pub fn receive_aux(&mut self, aux: StateVector) {
        self.pending_aux.push(aux);
    }

    /// Runs the server half of the R-gadget on `wire` with correction bit `x`:
    /// R on the data wire, CNOT from the aux (control) into the data wire,
    /// measure the data wire, then `P^x` on the aux, which takes over the
    /// data wire's index.
    pub fn run_r(&mut self, wire: usize, x: bool) -> Result<Message, EngineError> {
        if self.pending_aux.is_empty() {
            return Err(EngineError::Protocol(
                "R gadget without an aux qubit".into(),
            ));
        }
        let aux = self.pending_aux.remove(0);
        let mut reg = self.register.append_wire(&aux)?;
        let aux_wire = reg.num_wires() - 1;
        reg.apply_matrix_mut(Gate::R.matrix().matrix(), &[wire]);
        reg.apply_matrix_mut(Gate::Cnot.matrix().matrix(), &[aux_wire, wire]);
        let (c, mut reg) = self.outcomes.measure(&reg, wire)?;
        if x {
            reg.apply_matrix_mut(&p_power(1), &[aux_wire]);
        }
        let reg = reg.swap_wires(wire, aux_wire)?;
        self.register = reg.remove_collapsed_wire(aux_wire, c)?;
        Ok(Message::ClassicalC(c))
    }

    pub fn output(&self) -> Message {
        Message::OutputRegister(self.register.clone())
    }
}

/// One full R-gadget between an in-memory client and server, in protocol order.
/// Returns the messages exchanged.
pub fn r_gate_round(
    client: &mut ClientState,
    server: &mut ServerState,
    wire: usize,
) -> Result<Vec<Message>, EngineError> {
    let rand = client.draw_r_randomness();
    let (aux, x) = client.r_messages(wire, rand)?;
    let (Message::AuxQubit(aux_state), Message::ClassicalX(x_bit)) = (&aux, &x) else {
        unreachable!("r_messages returns an aux qubit and a bit")
    };
    server.receive_aux(aux_state.clone());
    let reply = server.run_r(wire, *x_bit)?;
    let Message::ClassicalC(c) = reply else {
        unreachable!("run_r returns ClassicalC")
    };
    client.finish_r(wire, rand, c)?;
    Ok(vec![aux, x, reply])
}

/// Server-side measurement as a standalone step.
pub fn server_measure(server: &mut ServerState, wire: usize) -> Result<Message, EngineError> {
    server.measure(wire)
}

/// Server-side Clifford step as a standalone function.
pub fn server_apply_clifford(server: &mut ServerState, op: &GateOp) -> Result<(), EngineError> {
    server.apply_clifford(op)
}
