//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Every tolerance and time budget is a constant
//! below.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::panic;
use std::time::{Duration, Instant};

use qced_core::circuits::{
    parse_circuit, random_circuit, resources, simulate_branches, Circuit, RandomCircuitSpec,
};
use qced_core::engine::{
    check_transcript_structure, run_delegation, run_delegation_branches, run_delegation_with,
    Message, MessageKind, RunOptions,
};
use qced_core::identities::{verify_identities, IdentityFamily, IdentityOptions};
use qced_core::keytrack::{
    update_cnot, update_h, update_measure, update_p, update_r, update_x, update_z, PauliKey,
    RGateRandomness,
};
use qced_core::par::{map_collect, Execution};
use qced_core::qcore::{
    average_over_keys, fidelity_up_to_global_phase, trace_distance, DensityMatrix, StateVector, C64,
};
use qced_core::security::{
    audit_ciphertext_mixedness, audit_ciphertext_mixedness_with, bundled_strategies,
    choi_of_induced_channel, choi_of_induced_channel_with, equivalence_circuits, strategy_circuits,
    AuditLevel, ClientMode, JointOptions, MixednessOptions, Protocol, ServerStrategy,
};
use qced_transport::{decode, encode, encode_frame, serve_connection, Frame, SessionOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALGEBRAIC_TOL: f64 = 1e-12;
const END_TO_END_TOL: f64 = 1e-10;
const CHOI_TOL: f64 = 1e-10;
const OTP_TOL: f64 = 1e-12;
/// A leak must be visible far above numerical noise.
const LEAK_MARGIN: f64 = 1e-3;

const STATES_PER_CASE: usize = 50;
const E2E_CIRCUITS: usize = 200;
const MIN_EQUIVALENCE_CIRCUITS: usize = 50;
const MIN_STRATEGIES: usize = 4;
const FRAME_MESSAGES: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "gate and circuit identities",
            Duration::from_secs(1),
            c1_identities,
        ),
        (
            2,
            "key-update tables",
            Duration::from_secs(5),
            c2_key_tables,
        ),
        (3, "R-gate gadget", Duration::from_secs(5), c3_r_gadget),
        (
            4,
            "end-to-end delegation",
            Duration::from_secs(60),
            c4_end_to_end,
        ),
        (5, "resource counts", Duration::from_secs(1), c5_resources),
        (
            6,
            "one-time-pad privacy",
            Duration::from_secs(10),
            c6_one_time_pad,
        ),
        (
            7,
            "protocol equivalence",
            Duration::from_secs(120),
            c7_protocol_equivalence,
        ),
        (
            8,
            "simulation security",
            Duration::from_secs(120),
            c8_simulation,
        ),
        (
            9,
            "negative control",
            Duration::from_secs(30),
            c9_negative_control,
        ),
        (10, "transport", Duration::from_secs(30), c10_transport),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, budget, f) in criteria {
        let t = Instant::now();
        let result = panic::catch_unwind(f);
        let elapsed = t.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {n} ({name}): {detail}; {:.3}s (budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    let _ = panic::take_hook();
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

// A tiny independent oracle: 2×2 matrices and two-qubit amplitudes.

type M2 = [[C64; 2]; 2];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diag(a: C64, b: C64) -> M2 {
    [[a, c(0.0, 0.0)], [c(0.0, 0.0), b]]
}

fn gx() -> M2 {
    [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

fn gz() -> M2 {
    diag(c(1.0, 0.0), c(-1.0, 0.0))
}

fn gp() -> M2 {
    diag(c(1.0, 0.0), c(0.0, 1.0))
}

fn gr() -> M2 {
    diag(c(1.0, 0.0), C64::from_polar(1.0, FRAC_PI_4))
}

fn id2() -> M2 {
    diag(c(1.0, 0.0), c(1.0, 0.0))
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn chain(ms: &[M2]) -> M2 {
    ms.iter().fold(id2(), |acc, m| mul(&acc, m))
}

fn powb(m: M2, k: bool) -> M2 {
    if k {
        m
    } else {
        id2()
    }
}

/// `|tr(A†B)|² / 4`: 1 exactly when A and B agree up to phase.
fn op_fid(a: &M2, b: &M2) -> f64 {
    let mut t = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            t += a[i][j].conj() * b[i][j];
        }
    }
    t.norm_sqr() / 4.0
}

fn apply(m: &M2, v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn fid2(a: [C64; 2], b: [C64; 2]) -> f64 {
    let inner = a[0].conj() * b[0] + a[1].conj() * b[1];
    inner.norm_sqr() / ((a[0].norm_sqr() + a[1].norm_sqr()) * (b[0].norm_sqr() + b[1].norm_sqr()))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [C64; 2] {
    let v = [
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    ];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

fn c1_identities() -> Outcome {
    let mut worst = 1.0f64;
    let (x, z, p, r) = (gx(), gz(), gp(), gr());
    let pairs = [
        (mul(&x, &z), mul(&z, &x)),
        (mul(&p, &z), mul(&z, &p)),
        (mul(&p, &x), chain(&[x, z, p])),
        (mul(&r, &z), mul(&z, &r)),
        (mul(&r, &x), chain(&[x, z, p, r])),
        (mul(&p, &p), z),
    ];
    for (a, b) in &pairs {
        worst = worst.min(op_fid(a, b));
    }
    for a in [false, true] {
        for b in [false, true] {
            let lhs = powb(p, a ^ b);
            let pa_b = (0..(a as u8 + b as u8)).fold(id2(), |acc, _| mul(&acc, &p));
            worst = worst.min(op_fid(&lhs, &mul(&powb(z, a & b), &pa_b)));
        }
    }
    let suite = verify_identities(&IdentityOptions::default()).expect("suite runs");
    let mut count = pairs.len() + 4;
    for check in suite
        .checks
        .iter()
        .filter(|c| matches!(c.family, IdentityFamily::Gate | IdentityFamily::Circuit))
    {
        worst = worst.min(check.min_fidelity);
        count += 1;
    }
    outcome(
        1.0 - worst <= ALGEBRAIC_TOL,
        format!(
            "{count} checks, worst 1 - fidelity {:e} (tolerance {ALGEBRAIC_TOL:e})",
            1.0 - worst
        ),
    )
}

fn c2_key_tables() -> Outcome {
    // figure labels, written out per gate
    let mut table_ok = true;
    for k in PauliKey::all() {
        let (a, b) = (k.x, k.z);
        table_ok &= update_x(k) == k && update_z(k) == k;
        table_ok &= update_h(k) == PauliKey::new(b, a);
        table_ok &= update_p(k) == PauliKey::new(a, a ^ b);
        for r in [false, true] {
            table_ok &= update_measure(k, r) == (r ^ a);
        }
        for t in PauliKey::all() {
            let (cc, d) = (t.x, t.z);
            table_ok &= update_cnot(k, t) == (PauliKey::new(a, b ^ d), PauliKey::new(a ^ cc, d));
        }
    }
    let opts = IdentityOptions {
        states_per_case: STATES_PER_CASE,
        ..IdentityOptions::default()
    };
    let suite = verify_identities(&opts).expect("suite runs");
    let tables: Vec<_> = suite
        .checks
        .iter()
        .filter(|c| c.family == IdentityFamily::KeyTable)
        .collect();
    let worst = tables.iter().map(|c| c.min_fidelity).fold(1.0, f64::min);
    let names: Vec<&str> = tables.iter().map(|c| c.name).collect();
    let all_gadgets = [
        "measure", "aux", "x", "z", "h", "p", "cnot", "r-naive", "r-gadget",
    ]
    .iter()
    .all(|n| names.contains(n));
    let cases: usize = tables.iter().map(|c| c.cases).sum();
    outcome(
        table_ok && all_gadgets && 1.0 - worst <= ALGEBRAIC_TOL,
        format!(
            "{} gadget tables, {cases} cases at {STATES_PER_CASE} states per key case, symbolic labels {}, worst 1 - fidelity {:e}",
            tables.len(),
            if table_ok { "match" } else { "DIFFER" },
            1.0 - worst
        ),
    )
}

/// Two-qubit gadget on raw amplitudes: data `X^a Z^b ψ` (wire 0) and aux
/// `Z^d P^y |+⟩` (wire 1). R on 0, CNOT 1→0, measure 0 → `c`, `P^{a⊕y}` on 1.
fn gadget(psi: [C64; 2], a: bool, b: bool, y: bool, d: bool, cbit: bool) -> [C64; 2] {
    let data = apply(&chain(&[gr(), powb(gx(), a), powb(gz(), b)]), psi);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let aux = apply(
        &chain(&[powb(gz(), d), powb(gp(), y)]),
        [c(h, 0.0), c(h, 0.0)],
    );
    // amplitude index = 2·(wire 0) + (wire 1)
    let mut amp = [c(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            amp[2 * i + j] = data[i] * aux[j];
        }
    }
    // CNOT with control wire 1, target wire 0: swap |0,1⟩ and |1,1⟩
    amp.swap(1, 3);
    let row = cbit as usize;
    let rest = [amp[2 * row], amp[2 * row + 1]];
    apply(&powb(gp(), a ^ y), rest)
}

fn c3_r_gadget() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let states: Vec<[C64; 2]> = (0..STATES_PER_CASE)
        .map(|_| random_qubit(&mut rng))
        .collect();
    let mut worst = 1.0f64;
    let mut combos = 0;
    for bits in 0..32u32 {
        let bit = |i: u32| bits >> i & 1 == 1;
        let (a, b, y, d, cbit) = (bit(4), bit(3), bit(2), bit(1), bit(0));
        let next = update_r(PauliKey::new(a, b), RGateRandomness { p: y, z: d }, cbit);
        combos += 1;
        for psi in &states {
            let out = gadget(*psi, a, b, y, d, cbit);
            // undo X^x Z^z: X first, then Z
            let plain = apply(&powb(gz(), next.z), apply(&powb(gx(), next.x), out));
            worst = worst.min(fid2(plain, apply(&gr(), *psi)));
        }
    }
    let suite = verify_identities(&IdentityOptions::default()).expect("suite runs");
    let steps: Vec<_> = suite
        .checks
        .iter()
        .filter(|c| c.family == IdentityFamily::Derivation)
        .collect();
    let step_worst = steps.iter().map(|c| c.min_fidelity).fold(1.0, f64::min);
    let gadget_table = suite.get("r-gadget").map(|c| c.min_fidelity).unwrap_or(0.0);
    let all = worst.min(step_worst).min(gadget_table);
    outcome(
        combos == 32 && steps.len() == 4 && 1.0 - all <= ALGEBRAIC_TOL,
        format!(
            "{combos} (a,b,y,d,c) combinations x {STATES_PER_CASE} states, {} derivation steps, worst 1 - fidelity {:e}",
            steps.len(),
            1.0 - all
        ),
    )
}

fn c4_end_to_end() -> Outcome {
    let spec = RandomCircuitSpec {
        max_initial_wires: 5,
        max_ops: 40,
        ..RandomCircuitSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4040);
    let cases: Vec<(u64, Circuit, StateVector)> = (0..E2E_CIRCUITS as u64)
        .map(|i| {
            let c = random_circuit(&mut rng, spec);
            let psi = StateVector::random(c.initial_wires(), &mut rng);
            (i, c, psi)
        })
        .collect();
    let results = map_collect(Execution::Parallel, &cases, |(seed, c, psi)| {
        let plain = simulate_branches(c, psi).expect("oracle runs");
        let runs =
            run_delegation_branches(c, psi, &RunOptions::seeded(*seed)).expect("delegation runs");
        let mut worst = 1.0f64;
        let mut mass: BTreeMap<Vec<(usize, bool)>, f64> = BTreeMap::new();
        for run in &runs {
            let f = plain
                .iter()
                .find(|b| b.outcomes == run.plaintext_bits)
                .map(|b| fidelity_up_to_global_phase(&run.output, &b.state).expect("same width"))
                .unwrap_or(0.0);
            worst = worst.min(f);
            *mass
                .entry(run.plaintext_bits.iter().map(|(&w, &v)| (w, v)).collect())
                .or_default() += run.probability;
        }
        let mut mass_err = 0.0f64;
        for b in &plain {
            let key: Vec<(usize, bool)> = b.outcomes.iter().map(|(&w, &v)| (w, v)).collect();
            mass_err = mass_err.max((mass.get(&key).copied().unwrap_or(0.0) - b.probability).abs());
        }
        (worst, mass_err, runs.len(), c.ops().len())
    });
    let worst = results.iter().map(|r| r.0).fold(1.0, f64::min);
    let mass = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let branches: usize = results.iter().map(|r| r.2).sum();
    let max_ops = results.iter().map(|r| r.3).max().unwrap_or(0);
    outcome(
        1.0 - worst <= END_TO_END_TOL && mass <= END_TO_END_TOL,
        format!(
            "{E2E_CIRCUITS} circuits (up to {max_ops} ops), {branches} branches, worst 1 - fidelity {:e}, worst branch-mass error {:e}",
            1.0 - worst,
            mass
        ),
    )
}

fn c5_resources() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut ok = true;
    let mut rounds = 0;
    let mut clifford = 0;
    for i in 0..200u64 {
        let c = random_circuit(&mut rng, RandomCircuitSpec::default());
        let run = run_delegation(&c, &StateVector::zero(c.initial_wires()).unwrap(), i).unwrap();
        let r = resources(&c);
        let t = &run.transcript;
        ok &= check_transcript_structure(&c, t).is_ok();
        ok &= t.count(MessageKind::AuxQubit) == r.aux_qubits_sent
            && r.aux_qubits_sent == c.r_gate_count();
        ok &= t.count(MessageKind::ClassicalX) == r.classical_bits_client_to_server;
        ok &= t.count(MessageKind::ClassicalC) == r.classical_bits_server_to_client;
        ok &= r.classical_bits_client_to_server == c.r_gate_count()
            && r.classical_bits_server_to_client == c.r_gate_count();
        rounds += c.r_gate_count();
    }
    for text in [
        "qubits 1\n",
        "qubits 1\nH 0\nP 0\nX 0\nZ 0\n",
        "qubits 3\nH 0\nCNOT 0 1\nCNOT 1 2\nP 2\nH 2\n",
        "qubits 2\nAUX\nCNOT 0 2\nH 1\n",
    ] {
        let c = parse_circuit(text).unwrap();
        let run = run_delegation(&c, &StateVector::zero(c.initial_wires()).unwrap(), 1).unwrap();
        ok &= run.transcript.len() == 2;
        clifford += 1;
    }
    outcome(
        ok,
        format!("200 random circuits ({rounds} R rounds): 1 aux qubit and 1 bit each way per R; {clifford} Clifford circuits with exactly 2 messages"),
    )
}

fn c6_one_time_pad() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst = 0.0f64;
    let mut inputs = 0;
    for n in 1..=3usize {
        let wires: Vec<usize> = (0..n).collect();
        let mixed = DensityMatrix::maximally_mixed(n);
        let states: Vec<StateVector> = (0..1usize << n)
            .map(|i| StateVector::basis(n, i).unwrap())
            .chain((0..5).map(|_| StateVector::random(n, &mut rng)))
            .collect();
        for s in &states {
            let avg = average_over_keys(s, &wires).unwrap();
            worst = worst.max(trace_distance(&avg, &mixed).unwrap());
            inputs += 1;
        }
        // the server's whole view of a delegated run with R gates
        let text = match n {
            1 => "qubits 1\nH 0\nR 0\n",
            2 => "qubits 2\nH 0\nR 0\nCNOT 0 1\nR 1\n",
            _ => "qubits 3\nH 0\nCNOT 0 1\nR 2\n",
        };
        let rep = audit_ciphertext_mixedness(
            &parse_circuit(text).unwrap(),
            &states,
            AuditLevel::Exhaustive,
        )
        .unwrap();
        worst = worst.max(rep.max_distance);
    }
    outcome(
        worst <= OTP_TOL,
        format!("{inputs} inputs on 1-3 wires, pad alone and full protocol view: max trace distance {worst:e} (tolerance {OTP_TOL:e})"),
    )
}

fn c7_protocol_equivalence() -> Outcome {
    let circuits = equivalence_circuits();
    let honest = ServerStrategy::honest();
    let worst = map_collect(Execution::Parallel, &circuits, |c| {
        let chois: Vec<_> = Protocol::ALL
            .iter()
            .map(|p| choi_of_induced_channel(c, &honest, ClientMode::Real(*p)).unwrap())
            .collect();
        let mut d = 0.0f64;
        for i in 0..chois.len() {
            for j in i + 1..chois.len() {
                d = d.max(chois[i].trace_distance(&chois[j]).unwrap());
            }
        }
        d
    })
    .into_iter()
    .fold(0.0, f64::max);
    outcome(
        circuits.len() >= MIN_EQUIVALENCE_CIRCUITS && worst <= CHOI_TOL,
        format!(
            "{} circuits, protocols 1/2/3 pairwise max Choi trace distance {worst:e} (tolerance {CHOI_TOL:e})",
            circuits.len()
        ),
    )
}

fn c8_simulation() -> Outcome {
    let circuits = strategy_circuits();
    let mut jobs = Vec::new();
    let mut names = Vec::new();
    let mut with_prior = false;
    for c in &circuits {
        for s in bundled_strategies(c, 8) {
            if !names.contains(&s.name().to_string()) {
                names.push(s.name().to_string());
            }
            with_prior |= s.prior_width() > 0;
            jobs.push((c.clone(), s));
        }
    }
    let results = map_collect(Execution::Parallel, &jobs, |(c, s)| {
        let sim = choi_of_induced_channel(c, s, ClientMode::Simulated).unwrap();
        let mut valid = sim.check_valid(CHOI_TOL).is_ok();
        let mut d = 0.0f64;
        for p in Protocol::ALL {
            let real = choi_of_induced_channel(c, s, ClientMode::Real(p)).unwrap();
            valid &= real.check_valid(CHOI_TOL).is_ok();
            d = d.max(real.trace_distance(&sim).unwrap());
        }
        (d, valid)
    });
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let valid = results.iter().all(|r| r.1);
    let widths_ok = circuits
        .iter()
        .all(|c| (1..=2).contains(&c.initial_wires()));
    outcome(
        names.len() >= MIN_STRATEGIES && with_prior && valid && widths_ok && worst <= CHOI_TOL,
        format!(
            "{} strategies ({}) x {} circuits x 3 protocols, Choi matrices valid: {valid}, max trace distance real vs simulated {worst:e}",
            names.len(),
            names.join(", "),
            circuits.len()
        ),
    )
}

fn leak_key(key: PauliKey, _: RGateRandomness) -> bool {
    key.x
}

fn c9_negative_control() -> Outcome {
    let c = parse_circuit("qubits 1\nH 0\nR 0\n").unwrap();
    let inputs = [StateVector::zero(1).unwrap(), StateVector::plus()];
    let mix = audit_ciphertext_mixedness_with(
        &c,
        &inputs,
        AuditLevel::Exhaustive,
        MixednessOptions {
            x_rule: leak_key,
            ..MixednessOptions::default()
        },
    )
    .unwrap();
    let s = ServerStrategy::measure_everything(&c);
    let real = choi_of_induced_channel_with(
        &c,
        &s,
        JointOptions {
            x_rule: leak_key,
            ..JointOptions::new(ClientMode::Real(Protocol::One))
        },
    )
    .unwrap();
    let sim = choi_of_induced_channel(&c, &s, ClientMode::Simulated).unwrap();
    let choi = real.trace_distance(&sim).unwrap();
    let caught_mix = mix.max_distance > OTP_TOL + LEAK_MARGIN;
    let caught_choi = choi > CHOI_TOL + LEAK_MARGIN;
    outcome(
        caught_mix || caught_choi,
        format!(
            "key-leaking x bit: mixedness distance {:.6} ({}), Choi distance {:.6} ({})",
            mix.max_distance,
            if caught_mix { "caught" } else { "missed" },
            choi,
            if caught_choi { "caught" } else { "missed" }
        ),
    )
}

fn random_message(rng: &mut ChaCha8Rng) -> Message {
    let register = |rng: &mut ChaCha8Rng, n: usize| StateVector::random(n, rng);
    match rng.random_range(0..6) {
        0 => {
            let n = rng.random_range(1..=4);
            Message::EncryptedRegister(register(rng, n))
        }
        1 => Message::AuxQubit(register(rng, 1)),
        2 => Message::ClassicalX(rng.random()),
        3 => Message::ClassicalC(rng.random()),
        4 => Message::ReportedMeasurement(rng.random()),
        _ => {
            let n = rng.random_range(1..=4);
            Message::OutputRegister(register(rng, n))
        }
    }
}

fn c10_transport() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut round_trips = 0;
    for _ in 0..FRAME_MESSAGES {
        let m = random_message(&mut rng);
        let bytes = encode_frame(&encode(&m));
        let (frame, used): (Frame, usize) = Frame::from_bytes(&bytes).unwrap();
        let back = decode(&frame).unwrap();
        if used == bytes.len() && back == m && encode_frame(&encode(&back)) == bytes {
            round_trips += 1;
        }
    }

    let mut circuits = vec![parse_circuit("qubits 1\nH 0\nR 0\n").unwrap()];
    let spec = RandomCircuitSpec {
        max_initial_wires: 3,
        max_ops: 20,
        max_total_wires: 6,
    };
    circuits.extend((0..5).map(|_| random_circuit(&mut rng, spec)));
    let mut identical = 0;
    for (i, c) in circuits.iter().enumerate() {
        let input = StateVector::random(c.initial_wires(), &mut rng);
        let (client_seed, server_seed) = (70 + i as u64, 700 + i as u64);
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let sc = c.clone();
        let server = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            serve_connection(stream, &sc, server_seed, &SessionOptions::default())
        });
        let socket = qced_transport::connect(addr, c, &input, client_seed).unwrap();
        server.join().unwrap().unwrap();
        let local = run_delegation_with(
            c,
            &input,
            &RunOptions {
                client_seed,
                server_seed,
                ..RunOptions::seeded(0)
            },
        )
        .unwrap();
        if socket.transcript.dump() == local.transcript.dump() && socket.output == local.output {
            identical += 1;
        }
    }
    outcome(
        round_trips == FRAME_MESSAGES && identical == circuits.len(),
        format!(
            "{round_trips}/{FRAME_MESSAGES} frames round-trip bit-exactly; {identical}/{} socket sessions bit-identical to in-process runs",
            circuits.len()
        ),
    )
}
