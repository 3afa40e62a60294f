use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qced_core::circuits::parse_circuit;
use qced_core::identities::{verify_identities, IdentityOptions};
use qced_core::par::Execution;
use qced_core::qcore::{average_over_keys_with, StateVector};
use qced_core::security::{
    audit_ciphertext_mixedness_with, choi_of_induced_channel_with, AuditLevel, ClientMode,
    JointOptions, MixednessOptions, Protocol, ServerStrategy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn key_averaging(c: &mut Criterion) {
    let mut g = c.benchmark_group("average_over_keys");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [3usize, 5] {
        let psi = StateVector::random(n, &mut rng);
        let wires: Vec<usize> = (0..n).collect();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| average_over_keys_with(exec, black_box(&psi), &wires).unwrap())
            });
        }
    }
    g.finish();
}

fn choi(c: &mut Criterion) {
    let mut g = c.benchmark_group("choi");
    g.sample_size(10);
    let circuit = parse_circuit("qubits 2\nH 0\nR 0\nCNOT 0 1\nR 1\n").unwrap();
    let strategy = ServerStrategy::honest();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                let opts = JointOptions {
                    exec,
                    ..JointOptions::new(ClientMode::Real(Protocol::One))
                };
                choi_of_induced_channel_with(black_box(&circuit), &strategy, opts).unwrap()
            })
        });
    }
    g.finish();
}

fn mixedness(c: &mut Criterion) {
    let mut g = c.benchmark_group("mixedness");
    g.sample_size(10);
    let circuit = parse_circuit("qubits 2\nH 0\nR 0\nCNOT 0 1\nR 1\n").unwrap();
    let inputs: Vec<StateVector> = (0..4).map(|i| StateVector::basis(2, i).unwrap()).collect();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                let opts = MixednessOptions {
                    exec,
                    ..MixednessOptions::default()
                };
                audit_ciphertext_mixedness_with(
                    black_box(&circuit),
                    &inputs,
                    AuditLevel::Exhaustive,
                    opts,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn identities(c: &mut Criterion) {
    let mut g = c.benchmark_group("identities");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = IdentityOptions {
            exec,
            ..IdentityOptions::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| verify_identities(black_box(&opts)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, key_averaging, choi, mixedness, identities);
criterion_main!(benches);
