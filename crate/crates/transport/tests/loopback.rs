use std::io::Write;
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use qced_core::circuits::{parse_circuit, random_circuit, Circuit, RandomCircuitSpec};
use qced_core::engine::{run_delegation_with, AuxTiming, Direction, RunOptions};
use qced_core::qcore::{fidelity_up_to_global_phase, StateVector};
use qced_transport::{
    connect_with, serve_connection, ClientReport, ServerReport, SessionOptions, TransportError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn session(
    client_circuit: &Circuit,
    server_circuit: &Circuit,
    input: &StateVector,
    client_seed: u64,
    server_seed: u64,
    opts: SessionOptions,
) -> (
    Result<ClientReport, TransportError>,
    Result<ServerReport, TransportError>,
) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let sc = server_circuit.clone();
    let server = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        serve_connection(stream, &sc, server_seed, &opts)
    });
    let client = connect_with(addr, client_circuit, input, client_seed, &opts);
    (client, server.join().unwrap())
}

fn in_process(
    circuit: &Circuit,
    input: &StateVector,
    client_seed: u64,
    server_seed: u64,
    aux: AuxTiming,
) -> qced_core::engine::DelegationRun {
    let opts = RunOptions {
        client_seed,
        server_seed,
        aux_timing: aux,
        x_rule: None,
    };
    run_delegation_with(circuit, input, &opts).unwrap()
}

#[test]
fn h_then_r_matches_in_process() {
    let c = parse_circuit("qubits 1\nH 0\nR 0\n").unwrap();
    let input = StateVector::from_bitstring("0").unwrap();
    let (client, server) = session(&c, &c, &input, 11, 29, SessionOptions::default());
    let client = client.unwrap();
    server.unwrap();
    assert_eq!(client.server_seed, 29);
    let oracle = in_process(&c, &input, 11, 29, AuxTiming::AtGate);
    assert_eq!(client.transcript.dump(), oracle.transcript.dump());
    assert_eq!(client.output, oracle.output);
    let expect = StateVector::plus()
        .apply_matrix(&qced_core::qcore::Gate::R.matrix().into_matrix(), &[0])
        .unwrap();
    assert!(fidelity_up_to_global_phase(&client.output, &expect).unwrap() >= 1.0 - 1e-12);
}

#[test]
fn random_circuits_match_in_process() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let spec = RandomCircuitSpec {
        max_initial_wires: 3,
        max_ops: 20,
        max_total_wires: 6,
    };
    for i in 0..12u64 {
        let c = random_circuit(&mut rng, spec);
        let input = StateVector::random(c.initial_wires(), &mut rng);
        let aux = if i % 2 == 0 {
            AuxTiming::AtGate
        } else {
            AuxTiming::FrontLoaded
        };
        let opts = SessionOptions {
            aux_timing: aux,
            ..SessionOptions::default()
        };
        let (client, server) = session(&c, &c, &input, 100 + i, 900 + i, opts);
        let client = client.unwrap();
        let server = server.unwrap();
        let oracle = in_process(&c, &input, 100 + i, 900 + i, aux);
        assert_eq!(
            client.transcript.dump(),
            oracle.transcript.dump(),
            "circuit:\n{}",
            c.serialize()
        );
        assert_eq!(client.output, oracle.output);
        assert_eq!(client.plaintext_bits, oracle.plaintext_bits);
        assert_eq!(client.final_keys, oracle.final_keys);
        // the server sees the same messages, possibly interleaved differently
        let mut a = server
            .transcript
            .dump()
            .lines()
            .map(|l| l.split_once(' ').unwrap().1.to_string())
            .collect::<Vec<_>>();
        let mut b = oracle
            .transcript
            .dump()
            .lines()
            .map(|l| l.split_once(' ').unwrap().1.to_string())
            .collect::<Vec<_>>();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(server.frames_after_handshake, client.frames.len());
    }
}

#[test]
fn clifford_session_is_three_frames() {
    let c = parse_circuit("qubits 2\nH 0\nCNOT 0 1\nP 1\nX 0\n").unwrap();
    let input = StateVector::from_bitstring("01").unwrap();
    let (client, server) = session(&c, &c, &input, 3, 4, SessionOptions::default());
    let client = client.unwrap();
    let server = server.unwrap();
    let dirs: Vec<Direction> = client.frames.iter().map(|(d, _)| *d).collect();
    assert_eq!(
        dirs,
        vec![
            Direction::ClientToServer,
            Direction::ServerToClient,
            Direction::ClientToServer
        ]
    );
    assert_eq!(client.frames[0].1.tag, 0x01);
    assert_eq!(client.frames[1].1.tag, 0x06);
    assert!(client.frames[2].1.is_close());
    assert_eq!(server.frames_after_handshake, 3);
    assert_eq!(client.transcript.len(), 2);
}

#[test]
fn hash_mismatch_aborts_before_register() {
    let a = parse_circuit("qubits 1\nH 0\n").unwrap();
    let b = parse_circuit("qubits 1\nR 0\n").unwrap();
    let input = StateVector::from_bitstring("0").unwrap();
    let (client, server) = session(&a, &b, &input, 1, 2, SessionOptions::default());
    assert!(matches!(client, Err(TransportError::HashMismatch { .. })));
    assert!(matches!(server, Err(TransportError::HashMismatch { .. })));
}

#[test]
fn frames_never_carry_key_bits() {
    // 6 wires and 10 R gates: 12 + 20 secret bits, plus the final pad
    let mut text = String::from("qubits 6\n");
    for i in 0..10 {
        text.push_str(&format!("H {}\nR {}\n", i % 6, i % 6));
    }
    let c = parse_circuit(&text).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let input = StateVector::random(6, &mut rng);
    let (client, server) = session(&c, &c, &input, 5150, 8, SessionOptions::default());
    let client = client.unwrap();
    server.unwrap();

    // replay the client's pad from its seed
    let mut state = qced_core::engine::ClientState::new(5150);
    state.encrypt(&input).unwrap();
    let mut bits = Vec::new();
    for k in state.keys().dense(6).unwrap() {
        bits.extend([k.x, k.z]);
    }
    for k in client.final_keys.dense(6).unwrap() {
        bits.extend([k.x, k.z]);
    }
    for r in &client.randomness {
        bits.extend([r.p, r.z]);
    }
    assert!(bits.len() >= 32);
    let secret: Vec<u8> = bits
        .chunks(8)
        .map(|ch| ch.iter().fold(0u8, |acc, b| (acc << 1) | *b as u8))
        .collect();
    let stream: Vec<u8> = client
        .frames
        .iter()
        .flat_map(|(_, f)| qced_transport::encode_frame(f))
        .collect();
    for needle in secret.chunks_exact(4) {
        assert!(!stream.windows(4).any(|w| w == needle));
    }
    // x-messages are single masked bits, never a key byte block
    for (_, f) in &client.frames {
        if f.tag == 0x03 {
            assert_eq!(f.payload.len(), 1);
        }
    }
}

#[test]
fn silent_server_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hold = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        thread::sleep(Duration::from_millis(800));
        drop(stream);
    });
    let c = parse_circuit("qubits 1\nH 0\n").unwrap();
    let opts = SessionOptions {
        timeout: Duration::from_millis(200),
        ..SessionOptions::default()
    };
    let r = connect_with(
        addr,
        &c,
        &StateVector::from_bitstring("0").unwrap(),
        1,
        &opts,
    );
    assert!(matches!(r, Err(TransportError::Timeout)), "{r:?}");
    hold.join().unwrap();
}

#[test]
fn truncated_client_frame_is_reported() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let c = parse_circuit("qubits 1\nH 0\n").unwrap();
    let sc = c.clone();
    let server = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        serve_connection(stream, &sc, 0, &SessionOptions::default())
    });
    let mut raw = TcpStream::connect(addr).unwrap();
    raw.write_all(&[0, 0, 0, 41, 0x06, 1, 2]).unwrap();
    drop(raw);
    assert!(matches!(
        server.join().unwrap(),
        Err(TransportError::Truncated { .. })
    ));
}
