//! The audit suite behind `qced audit`.

use std::time::Instant;

use qced_core::circuits::Circuit;
use qced_core::engine::{check_transcript_structure, run_delegation};
use qced_core::keytrack::{client_x_message, PauliKey, RGateRandomness};
use qced_core::par::Execution;
use qced_core::qcore::StateVector;
use qced_core::security::{
    audit_ciphertext_mixedness_with, bundled_strategies, choi_of_induced_channel_with, AuditLevel,
    ChoiMatrix, ClientMode, JointOptions, MixednessOptions, Protocol, SecurityError,
    ServerStrategy, CHOI_TOL, MONTE_CARLO_TOL,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::{AuditCheck, AuditReport, SCHEMA};

/// Deliberately broken client behaviour, for showing the audit has teeth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fixture {
    #[default]
    None,
    /// The R-gadget bit carries the wire's X key in the clear.
    LeakKey,
}

pub fn leak_key(key: PauliKey, _: RGateRandomness) -> bool {
    key.x
}

#[derive(Clone, Copy, Debug)]
pub struct AuditConfig {
    pub level: AuditLevel,
    pub seed: u64,
    pub fixture: Fixture,
    pub exec: Execution,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            level: AuditLevel::Exhaustive,
            seed: 0,
            fixture: Fixture::None,
            exec: Execution::default(),
        }
    }
}

impl AuditConfig {
    fn x_rule(&self) -> qced_core::engine::XRule {
        match self.fixture {
            Fixture::None => client_x_message,
            Fixture::LeakKey => leak_key,
        }
    }

    fn joint(&self, mode: ClientMode) -> JointOptions {
        JointOptions {
            x_rule: self.x_rule(),
            exec: self.exec,
            ..JointOptions::new(mode)
        }
    }
}

/// Inputs the mixedness audit averages over: every basis state when there
/// are at most three wires (otherwise just `|0…0⟩`), plus two random states.
pub fn audit_inputs(wires: usize, seed: u64) -> Vec<StateVector> {
    let basis = if wires <= 3 { 1usize << wires } else { 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..basis)
        .map(|i| StateVector::basis(wires, i).expect("in range"))
        .chain((0..2).map(|_| StateVector::random(wires, &mut rng)))
        .collect()
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn run_audit(circuit: &Circuit, cfg: &AuditConfig) -> Result<AuditReport, SecurityError> {
    let hash = circuit.hash_hex();
    let mut checks = Vec::new();
    let check = |name: &str,
                 strategy: &str,
                 metric: &str,
                 value: f64,
                 tolerance: f64,
                 sw: f64,
                 sim: Option<f64>| {
        AuditCheck {
            name: name.into(),
            circuit_hash: hash.clone(),
            strategy_name: strategy.into(),
            metric: metric.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            strategy_wall_ms: sw,
            simulator_wall_ms: sim,
        }
    };

    let zero = StateVector::zero(circuit.initial_wires())?;
    let run = run_delegation(circuit, &zero, cfg.seed)?;
    let structure = check_transcript_structure(circuit, &run.transcript);
    checks.push(check(
        "transcript-structure",
        "honest",
        "structure-violations",
        structure.is_err() as u8 as f64,
        0.0,
        0.0,
        None,
    ));

    let t = Instant::now();
    let mix = audit_ciphertext_mixedness_with(
        circuit,
        &audit_inputs(circuit.initial_wires(), cfg.seed),
        cfg.level,
        MixednessOptions {
            x_rule: cfg.x_rule(),
            exec: cfg.exec,
        },
    )?;
    let tol = match cfg.level {
        AuditLevel::Exhaustive => CHOI_TOL,
        AuditLevel::MonteCarlo { .. } => MONTE_CARLO_TOL,
    };
    checks.push(check(
        "ciphertext-mixedness",
        "passive",
        "trace-distance-to-maximally-mixed",
        mix.max_distance,
        tol,
        ms(t),
        None,
    ));

    let honest = ServerStrategy::honest();
    let t = Instant::now();
    let chois: Vec<ChoiMatrix> = Protocol::ALL
        .iter()
        .map(|p| choi_of_induced_channel_with(circuit, &honest, cfg.joint(ClientMode::Real(*p))))
        .collect::<Result<_, _>>()?;
    let mut eq = 0.0f64;
    for other in &chois[1..] {
        eq = eq.max(chois[0].trace_distance(other)?);
    }
    checks.push(check(
        "protocol-equivalence",
        honest.name(),
        "choi-trace-distance",
        eq,
        CHOI_TOL,
        ms(t),
        None,
    ));

    for strategy in bundled_strategies(circuit, cfg.seed) {
        let t = Instant::now();
        let sim =
            choi_of_induced_channel_with(circuit, &strategy, cfg.joint(ClientMode::Simulated))?;
        let sim_ms = ms(t);
        let t = Instant::now();
        let mut worst = 0.0f64;
        for p in Protocol::ALL {
            let real =
                choi_of_induced_channel_with(circuit, &strategy, cfg.joint(ClientMode::Real(p)))?;
            worst = worst.max(real.trace_distance(&sim)?);
        }
        checks.push(check(
            "simulation",
            strategy.name(),
            "choi-trace-distance",
            worst,
            CHOI_TOL,
            ms(t),
            Some(sim_ms),
        ));
    }

    Ok(AuditReport {
        schema: SCHEMA,
        command: "audit",
        pass: checks.iter().all(|c| c.pass),
        circuit_hash: hash.clone(),
        level: match cfg.level {
            AuditLevel::Exhaustive => "exhaustive".into(),
            AuditLevel::MonteCarlo { samples, .. } => format!("monte-carlo:{samples}"),
        },
        transcript_messages: run.transcript.len(),
        clifford_only: circuit.is_clifford_only(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qced_core::circuits::parse_circuit;

    #[test]
    fn one_qubit_r_passes() {
        let c = parse_circuit("qubits 1\nR 0\n").unwrap();
        let rep = run_audit(&c, &AuditConfig::default()).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        assert_eq!(rep.checks.len(), 3 + 5);
    }

    #[test]
    fn clifford_transcript_is_two_messages() {
        let c = parse_circuit("qubits 2\nH 0\nCNOT 0 1\n").unwrap();
        let rep = run_audit(&c, &AuditConfig::default()).unwrap();
        assert!(rep.pass);
        assert!(rep.clifford_only);
        assert_eq!(rep.transcript_messages, 2);
    }

    #[test]
    fn leaking_fixture_fails() {
        let c = parse_circuit("qubits 1\nR 0\n").unwrap();
        let rep = run_audit(
            &c,
            &AuditConfig {
                fixture: Fixture::LeakKey,
                ..AuditConfig::default()
            },
        )
        .unwrap();
        assert!(!rep.pass);
        let mix = rep
            .checks
            .iter()
            .find(|c| c.name == "ciphertext-mixedness")
            .unwrap();
        assert!(!mix.pass);
    }

    #[test]
    fn inputs_cover_basis() {
        assert_eq!(audit_inputs(2, 0).len(), 6);
        assert_eq!(audit_inputs(5, 0).len(), 3);
    }
}
