//! Blocking client and server endpoints over TCP.

use std::collections::BTreeMap;
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::time::Duration;

use qced_core::circuits::Circuit;
use qced_core::engine::{
    AuxTiming, ClientEndpoint, Direction, Message, OutcomeSource, ServerEndpoint, Transcript,
};
use qced_core::keytrack::{KeyRegister, RGateRandomness};
use qced_core::qcore::StateVector;

use crate::frame::{decode, encode, io_error, read_frame, write_frame, Frame, Handshake};
use crate::TransportError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Copy, Debug)]
pub struct SessionOptions {
    /// Applied to connect, every read and every write.
    pub timeout: Duration,
    pub aux_timing: AuxTiming,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            timeout: DEFAULT_TIMEOUT,
            aux_timing: AuxTiming::AtGate,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClientReport {
    pub output: StateVector,
    pub plaintext_bits: BTreeMap<usize, bool>,
    /// Messages in the order the client sent or received them.
    pub transcript: Transcript,
    pub server_seed: u64,
    /// Every frame after the handshake, both directions, close included.
    pub frames: Vec<(Direction, Frame)>,
    pub final_keys: KeyRegister,
    pub randomness: Vec<RGateRandomness>,
}

#[derive(Clone, Debug)]
pub struct ServerReport {
    /// Messages in the order the server sent or received them.
    pub transcript: Transcript,
    pub frames_after_handshake: usize,
}

fn configure(stream: &TcpStream, timeout: Duration) -> Result<(), TransportError> {
    stream.set_read_timeout(Some(timeout)).map_err(io_error)?;
    stream.set_write_timeout(Some(timeout)).map_err(io_error)?;
    stream.set_nodelay(true).map_err(io_error)
}

fn check_hash(ours: &[u8; 32], theirs: &[u8; 32]) -> Result<(), TransportError> {
    if ours != theirs {
        return Err(TransportError::HashMismatch {
            ours: hex(ours),
            theirs: hex(theirs),
        });
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Accepts one connection on `addr` and serves a single session.
pub fn serve<A: ToSocketAddrs>(
    addr: A,
    circuit: &Circuit,
    seed: u64,
    opts: &SessionOptions,
) -> Result<ServerReport, TransportError> {
    let listener = TcpListener::bind(addr).map_err(io_error)?;
    let (stream, _) = listener.accept().map_err(io_error)?;
    serve_connection(stream, circuit, seed, opts)
}

/// Runs the server side on an accepted stream. Measurements are sampled from
/// `seed`, which is sent to the client in the handshake.
pub fn serve_connection(
    mut stream: TcpStream,
    circuit: &Circuit,
    seed: u64,
    opts: &SessionOptions,
) -> Result<ServerReport, TransportError> {
    configure(&stream, opts.timeout)?;
    let hash = circuit.hash();
    let hello = Handshake::from_frame(&read_frame(&mut stream)?)?;
    write_frame(
        &mut stream,
        &Handshake {
            circuit_hash: hash,
            seed,
        }
        .to_frame(),
    )?;
    check_hash(&hash, &hello.circuit_hash)?;

    let mut server = ServerEndpoint::new(circuit.clone(), OutcomeSource::sampled(seed))?;
    let mut transcript = Transcript::new();
    let mut frames = 0;
    loop {
        let frame = read_frame(&mut stream)?;
        frames += 1;
        if frame.is_close() {
            break;
        }
        let message = decode(&frame)?;
        if message.direction() != Direction::ClientToServer {
            return Err(TransportError::Unexpected(format!(
                "{} from client",
                message.kind().name()
            )));
        }
        transcript.push(message.clone());
        for reply in server.handle(message)? {
            write_frame(&mut stream, &encode(&reply))?;
            frames += 1;
            transcript.push(reply);
        }
    }
    if !server.is_done() {
        return Err(TransportError::Unexpected(
            "client closed before the circuit finished".into(),
        ));
    }
    Ok(ServerReport {
        transcript,
        frames_after_handshake: frames,
    })
}

pub fn connect<A: ToSocketAddrs>(
    addr: A,
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
) -> Result<ClientReport, TransportError> {
    connect_with(addr, circuit, input, seed, &SessionOptions::default())
}

/// Runs the client side. Keys and aux randomness come from `seed`; the
/// server's seed is learned from its handshake.
pub fn connect_with<A: ToSocketAddrs>(
    addr: A,
    circuit: &Circuit,
    input: &StateVector,
    seed: u64,
    opts: &SessionOptions,
) -> Result<ClientReport, TransportError> {
    // reject a bad circuit or input before touching the network
    let mut client = ClientEndpoint::new(circuit.clone(), seed)?.with_aux_timing(opts.aux_timing);
    if input.num_wires() != circuit.initial_wires() {
        return Err(TransportError::Engine(
            qced_core::engine::EngineError::InputWidth {
                expected: circuit.initial_wires(),
                found: input.num_wires(),
            },
        ));
    }
    let mut stream = open(addr, opts.timeout)?;
    configure(&stream, opts.timeout)?;
    let hash = circuit.hash();
    write_frame(
        &mut stream,
        &Handshake {
            circuit_hash: hash,
            seed: 0,
        }
        .to_frame(),
    )?;
    let hello = Handshake::from_frame(&read_frame(&mut stream)?)?;
    check_hash(&hash, &hello.circuit_hash)?;

    let mut conn = ClientConn {
        stream,
        transcript: Transcript::new(),
        frames: Vec::new(),
    };
    for m in client.start(input)? {
        conn.send(m)?;
    }
    while !client.is_done() {
        let message = conn.recv()?;
        for reply in client.handle(message)? {
            conn.send(reply)?;
        }
    }
    conn.close()?;
    Ok(ClientReport {
        output: client
            .output()
            .cloned()
            .expect("finished client has output"),
        plaintext_bits: client.plaintext_bits().clone(),
        transcript: conn.transcript,
        server_seed: hello.seed,
        frames: conn.frames,
        final_keys: client.state().keys().clone(),
        randomness: client.state().randomness_log().to_vec(),
    })
}

fn open<A: ToSocketAddrs>(addr: A, timeout: Duration) -> Result<TcpStream, TransportError> {
    let mut last = None;
    for a in addr.to_socket_addrs().map_err(io_error)? {
        match TcpStream::connect_timeout(&a, timeout) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    Err(match last {
        Some(e) => io_error(e),
        None => TransportError::Unexpected("address resolved to nothing".into()),
    })
}

struct ClientConn {
    stream: TcpStream,
    transcript: Transcript,
    frames: Vec<(Direction, Frame)>,
}

impl ClientConn {
    fn send(&mut self, message: Message) -> Result<(), TransportError> {
        let frame = encode(&message);
        write_frame(&mut self.stream, &frame)?;
        self.frames.push((Direction::ClientToServer, frame));
        self.transcript.push(message);
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, TransportError> {
        let frame = read_frame(&mut self.stream)?;
        let message = decode(&frame)?;
        if message.direction() != Direction::ServerToClient {
            return Err(TransportError::Unexpected(format!(
                "{} from server",
                message.kind().name()
            )));
        }
        self.frames.push((Direction::ServerToClient, frame));
        self.transcript.push(message.clone());
        Ok(message)
    }

    fn close(&mut self) -> Result<(), TransportError> {
        let frame = Frame::close();
        write_frame(&mut self.stream, &frame)?;
        self.frames.push((Direction::ClientToServer, frame));
        Ok(())
    }
}
