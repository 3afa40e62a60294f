//! Reactive endpoints that walk the circuit and exchange messages, plus the
//! in-process drivers built on them.

use std::collections::{BTreeMap, VecDeque};

use super::message::{Message, MessageKind, Transcript};
use super::parties::{ClientState, OutcomeRecord, OutcomeSource, ServerState, XRule};
use super::EngineError;
use crate::circuits::{validate, Circuit, GateOp};
use crate::keytrack::{KeyRegister, RGateRandomness};
use crate::qcore::{StateVector, MAX_WIRES};

/// When the client ships aux qubits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AuxTiming {
    /// Each aux qubit travels with its R gate's classical bit.
    #[default]
    AtGate,
    /// All aux qubits follow the encrypted register.
    FrontLoaded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ClientWait {
    NotStarted,
    Report(usize),
    Correction(usize),
    Output,
    Done,
}

/// The client side of a run: owns the keys and consumes server messages.
#[derive(Clone, Debug)]
pub struct ClientEndpoint {
    circuit: Circuit,
    cursor: usize,
    state: ClientState,
    wait: ClientWait,
    timing: AuxTiming,
    queued_randomness: VecDeque<RGateRandomness>,
    current_r: Option<RGateRandomness>,
    plaintext_bits: BTreeMap<usize, bool>,
    output: Option<StateVector>,
}

impl ClientEndpoint {
    pub fn new(circuit: Circuit, seed: u64) -> Result<Self, EngineError> {
        validate(&circuit).map_err(EngineError::InvalidCircuit)?;
        // the R gadget needs one extra wire on top of the final register
        if circuit.final_wires() + 1 > MAX_WIRES {
            return Err(EngineError::TooWide(circuit.final_wires()));
        }
        Ok(Self {
            circuit,
            cursor: 0,
            state: ClientState::new(seed),
            wait: ClientWait::NotStarted,
            timing: AuxTiming::AtGate,
            queued_randomness: VecDeque::new(),
            current_r: None,
            plaintext_bits: BTreeMap::new(),
            output: None,
        })
    }

    pub fn with_x_rule(mut self, rule: XRule) -> Self {
        self.state = self.state.with_x_rule(rule);
        self
    }

    pub fn with_aux_timing(mut self, timing: AuxTiming) -> Self {
        self.timing = timing;
        self
    }

    pub fn state(&self) -> &ClientState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.wait == ClientWait::Done
    }

    /// Decrypted output, once the run finished.
    pub fn output(&self) -> Option<&StateVector> {
        self.output.as_ref()
    }

    pub fn plaintext_bits(&self) -> &BTreeMap<usize, bool> {
        &self.plaintext_bits
    }

    /// Encrypts `input` and runs ahead until a server message is needed.
    pub fn start(&mut self, input: &StateVector) -> Result<Vec<Message>, EngineError> {
        if self.wait != ClientWait::NotStarted {
            return Err(EngineError::Protocol("client already started".into()));
        }
        if input.num_wires() != self.circuit.initial_wires() {
            return Err(EngineError::InputWidth {
                expected: self.circuit.initial_wires(),
                found: input.num_wires(),
            });
        }
        let mut out = vec![self.state.encrypt(input)?];
        if self.timing == AuxTiming::FrontLoaded {
            for _ in 0..self.circuit.r_gate_count() {
                let rand = self.state.draw_r_randomness();
                self.queued_randomness.push_back(rand);
                out.push(Message::AuxQubit(super::parties::aux_qubit_state(rand)));
            }
        }
        self.advance(&mut out)?;
        Ok(out)
    }

    fn advance(&mut self, out: &mut Vec<Message>) -> Result<(), EngineError> {
        while let Some(op) = self.circuit.ops().get(self.cursor).copied() {
            self.cursor += 1;
            match op {
                GateOp::Measure(w) => {
                    self.wait = ClientWait::Report(w);
                    return Ok(());
                }
                GateOp::R(w) => {
                    let rand = match self.timing {
                        AuxTiming::AtGate => self.state.draw_r_randomness(),
                        AuxTiming::FrontLoaded => self
                            .queued_randomness
                            .pop_front()
                            .ok_or_else(|| EngineError::Protocol("aux queue exhausted".into()))?,
                    };
                    let (aux, x) = self.state.r_messages(w, rand)?;
                    if self.timing == AuxTiming::AtGate {
                        out.push(aux);
                    }
                    out.push(x);
                    self.current_r = Some(rand);
                    self.wait = ClientWait::Correction(w);
                    return Ok(());
                }
                _ => self.state.track(&op)?,
            }
        }
        self.wait = ClientWait::Output;
        Ok(())
    }

    /// Consumes one server message; returns whatever the client sends next.
    pub fn handle(&mut self, message: Message) -> Result<Vec<Message>, EngineError> {
        let mut out = Vec::new();
        match (self.wait, message) {
            (ClientWait::Report(w), Message::ReportedMeasurement(bit)) => {
                let plain = self.state.record_measurement(w, bit)?;
                self.plaintext_bits.insert(w, plain);
                self.advance(&mut out)?;
            }
            (ClientWait::Correction(w), Message::ClassicalC(c)) => {
                let rand = self.current_r.take().expect("R randomness recorded");
                self.state.finish_r(w, rand, c)?;
                self.advance(&mut out)?;
            }
            (ClientWait::Output, Message::OutputRegister(reg)) => {
                self.output = Some(self.state.decrypt(&reg)?);
                self.wait = ClientWait::Done;
            }
            (wait, m) => {
                return Err(EngineError::Protocol(format!(
                    "client waiting for {wait:?} received {}",
                    m.kind().name()
                )))
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ServerWait {
    Register,
    Aux(usize),
    Correction(usize),
    Done,
}

/// The server side: holds only ciphertext and received messages.
#[derive(Clone, Debug)]
pub struct ServerEndpoint {
    circuit: Circuit,
    cursor: usize,
    state: Option<ServerState>,
    outcomes: Option<OutcomeSource>,
    wait: ServerWait,
}

impl ServerEndpoint {
    pub fn new(circuit: Circuit, outcomes: OutcomeSource) -> Result<Self, EngineError> {
        validate(&circuit).map_err(EngineError::InvalidCircuit)?;
        Ok(Self {
            circuit,
            cursor: 0,
            state: None,
            outcomes: Some(outcomes),
            wait: ServerWait::Register,
        })
    }

    pub fn is_done(&self) -> bool {
        self.wait == ServerWait::Done
    }

    pub fn state(&self) -> Option<&ServerState> {
        self.state.as_ref()
    }

    fn server(&mut self) -> &mut ServerState {
        self.state.as_mut().expect("register received")
    }

    fn advance(&mut self, out: &mut Vec<Message>) -> Result<(), EngineError> {
        while let Some(op) = self.circuit.ops().get(self.cursor).copied() {
            self.cursor += 1;
            match op {
                GateOp::Measure(w) => out.push(self.server().measure(w)?),
                GateOp::Aux(_) => self.server().add_aux()?,
                GateOp::R(w) => {
                    self.wait = ServerWait::Aux(w);
                    // front-loaded aux qubits may already be waiting
                    if self.server_has_aux() {
                        self.wait = ServerWait::Correction(w);
                    }
                    return Ok(());
                }
                _ => self.server().apply_clifford(&op)?,
            }
        }
        out.push(self.server().output());
        self.wait = ServerWait::Done;
        Ok(())
    }

    fn server_has_aux(&self) -> bool {
        self.state
            .as_ref()
            .is_some_and(ServerState::has_pending_aux)
    }

    pub fn handle(&mut self, message: Message) -> Result<Vec<Message>, EngineError> {
        let mut out = Vec::new();
        match (self.wait, message) {
            (ServerWait::Register, Message::EncryptedRegister(reg)) => {
                let outcomes = self.outcomes.take().expect("outcomes unused before start");
                self.state = Some(ServerState::new(reg, outcomes));
                if self.circuit.initial_wires() != self.server().register().num_wires() {
                    return Err(EngineError::InputWidth {
                        expected: self.circuit.initial_wires(),
                        found: self.server().register().num_wires(),
                    });
                }
                self.advance(&mut out)?;
            }
            (ServerWait::Aux(w), Message::AuxQubit(aux)) => {
                self.server().receive_aux(aux);
                self.wait = ServerWait::Correction(w);
            }
            (wait, Message::AuxQubit(aux))
                if wait != ServerWait::Register && wait != ServerWait::Done =>
            {
                self.server().receive_aux(aux);
            }
            (ServerWait::Correction(w), Message::ClassicalX(x)) => {
                out.push(self.server().run_r(w, x)?);
                self.advance(&mut out)?;
            }
            (wait, m) => {
                return Err(EngineError::Protocol(format!(
                    "server waiting for {wait:?} received {}",
                    m.kind().name()
                )))
            }
        }
        Ok(out)
    }

    pub fn into_state(self) -> Option<ServerState> {
        self.state
    }
}

/// Everything one delegated run produced.
#[derive(Clone, Debug)]
pub struct DelegationRun {
    /// Decrypted output register.
    pub output: StateVector,
    pub plaintext_bits: BTreeMap<usize, bool>,
    pub transcript: Transcript,
    pub final_keys: KeyRegister,
    pub randomness: Vec<RGateRandomness>,
    /// Probability of this run's server outcomes (1 for sampled runs).
    pub probability: f64,
}

/// Pumps messages between two endpoints until both finish. Messages are
/// recorded in the order they are delivered.
pub fn run_session(
    client: &mut ClientEndpoint,
    server: &mut ServerEndpoint,
    input: &StateVector,
) -> Result<Transcript, EngineError> {
    let mut transcript = Transcript::new();
    let mut to_server: VecDeque<Message> = client.start(input)?.into();
    let mut to_client: VecDeque<Message> = VecDeque::new();
    loop {
        while let Some(m) = to_server.pop_front() {
            transcript.push(m.clone());
            to_client.extend(server.handle(m)?);
        }
        if to_client.is_empty() {
            break;
        }
        while let Some(m) = to_client.pop_front() {
            transcript.push(m.clone());
            to_server.extend(client.handle(m)?);
        }
    }
    if !(client.is_done() && server.is_done()) {
        return Err(EngineError::Protocol("session stalled".into()));
    }
    Ok(transcript)
}

/// Knobs for an in-process run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub client_seed: u64,
    pub server_seed: u64,
    pub aux_timing: AuxTiming,
    pub x_rule: Option<XRule>,
}

impl RunOptions {
    pub fn seeded(seed: u64) -> Self {
        Self {
            client_seed: seed,
            server_seed: seed,
            aux_timing: AuxTiming::AtGate,
            x_rule: None,
        }
    }
}

fn run_with_outcomes(
    circuit: &Circuit,
    input: &StateVector,
    opts: &RunOptions,
    outcomes: OutcomeSource,
) -> Result<(DelegationRun, Vec<OutcomeRecord>), EngineError> {
    let mut client =
        ClientEndpoint::new(circuit.clone(), opts.client_seed)?.with_aux_timing(opts.aux_timing);
    if let Some(rule) = opts.x_rule {
        client = client.with_x_rule(rule);
    }
    let mut server = ServerEndpoint::new(circuit.clone(), outcomes)?;
    let transcript = run_session(&mut client, &mut server, input)?;
    let log = server
        .into_state()
        .map(|s| s.outcomes().log().to_vec())
        .unwrap_or_default();
    let probability = log.iter().map(|r| r.probability).product();
    let run = DelegationRun {
        output: client
            .output()
            .cloned()
            .expect("finished client has output"),
        plaintext_bits: client.plaintext_bits().clone(),
        transcript,
        final_keys: client.state().keys().clone(),
        randomness: client.state().randomness_log().to_vec(),
        probability,
    };
    Ok((run, log))
}

/// One run, server outcomes sampled from `seed`.
pub fn run_delegation(
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
) -> Result<DelegationRun, EngineError> {
    run_delegation_with(circuit, input, &RunOptions::seeded(seed))
}

pub fn run_delegation_with(
    circuit: &Circuit,
    input: &StateVector,
    opts: &RunOptions,
) -> Result<DelegationRun, EngineError> {
    run_with_outcomes(
        circuit,
        input,
        opts,
        OutcomeSource::sampled(opts.server_seed),
    )
    .map(|(r, _)| r)
}

/// Every server-measurement branch for a fixed client seed, each weighted by
/// its probability. Branches are found depth-first by replaying the run with
/// a growing outcome script.
pub fn run_delegation_branches(
    circuit: &Circuit,
    input: &StateVector,
    opts: &RunOptions,
) -> Result<Vec<DelegationRun>, EngineError> {
    let mut pending = vec![Vec::<bool>::new()];
    let mut runs = Vec::new();
    while let Some(script) = pending.pop() {
        let fixed = script.len();
        let (run, log) = run_with_outcomes(circuit, input, opts, OutcomeSource::scripted(script))?;
        for (i, rec) in log.iter().enumerate().skip(fixed) {
            if rec.other_possible {
                let mut alt: Vec<bool> = log[..i].iter().map(|r| r.bit).collect();
                alt.push(!rec.bit);
                pending.push(alt);
            }
        }
        runs.push(run);
    }
    Ok(runs)
}

/// Checks the message structure a circuit dictates: one register in, one out,
/// and per R gate exactly one aux qubit and one bit each way.
pub fn check_transcript_structure(
    circuit: &Circuit,
    transcript: &Transcript,
) -> Result<(), String> {
    let r = circuit.r_gate_count();
    let expect = [
        (MessageKind::EncryptedRegister, 1),
        (MessageKind::OutputRegister, 1),
        (MessageKind::AuxQubit, r),
        (MessageKind::ClassicalX, r),
        (MessageKind::ClassicalC, r),
        (
            MessageKind::ReportedMeasurement,
            circuit
                .ops()
                .iter()
                .filter(|op| matches!(op, GateOp::Measure(_)))
                .count(),
        ),
    ];
    for (kind, n) in expect {
        let found = transcript.count(kind);
        if found != n {
            return Err(format!(
                "expected {n} {} message(s), found {found}",
                kind.name()
            ));
        }
    }
    let kinds = transcript.kinds();
    if kinds.first() != Some(&MessageKind::EncryptedRegister)
        || kinds.last() != Some(&MessageKind::OutputRegister)
    {
        return Err("transcript must open with the register and close with the output".into());
    }
    Ok(())
}
