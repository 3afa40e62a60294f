//! Reports shared by the text and JSON outputs.
//!
//! Every report serializes to one JSON object with `"schema": "qced-report/1"`
//! and a `command` field. Text output is rendered from the same values;
//! floats are printed with the JSON formatter so both carry identical numbers.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA: &str = "qced-report/1";

pub fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct Resources {
    pub r_gate_count: usize,
    pub aux_qubits_sent: usize,
    pub classical_bits_client_to_server: usize,
    pub classical_bits_server_to_client: usize,
    pub measurement_reports: usize,
}

impl From<qced_core::circuits::ResourceReport> for Resources {
    fn from(r: qced_core::circuits::ResourceReport) -> Self {
        Self {
            r_gate_count: r.r_gate_count,
            aux_qubits_sent: r.aux_qubits_sent,
            classical_bits_client_to_server: r.classical_bits_client_to_server,
            classical_bits_server_to_client: r.classical_bits_server_to_client,
            measurement_reports: r.measurement_reports,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TranscriptSummary {
    pub messages: usize,
    pub kinds: Vec<String>,
    pub structure_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub pass: bool,
    pub mode: String,
    pub circuit_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub server_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Decrypted output amplitudes as `[re, im]`, wire 0 most significant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Vec<[f64; 2]>>,
    pub plaintext_bits: BTreeMap<usize, bool>,
    pub transcript: TranscriptSummary,
    pub resources: Resources,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frames_after_handshake: Option<usize>,
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("{SCHEMA} run ({})\n", self.mode);
        s += &format!("circuit-hash: {}\nseed: {}\n", self.circuit_hash, self.seed);
        if let Some(seed) = self.server_seed {
            s += &format!("server-seed: {seed}\n");
        }
        if let Some(input) = &self.input {
            s += &format!("input: {input}\n");
        }
        if let Some(out) = &self.output {
            let width = out.len().trailing_zeros() as usize;
            s += "output:\n";
            for (i, [re, im]) in out.iter().enumerate() {
                s += &format!(
                    "  |{:0width$b}> {} {}i\n",
                    i,
                    num(*re),
                    num(*im),
                    width = width.max(1)
                );
            }
        }
        for (w, b) in &self.plaintext_bits {
            s += &format!("measured wire {w}: {}\n", *b as u8);
        }
        let t = &self.transcript;
        s += &format!(
            "transcript: {} message(s): {}\n",
            t.messages,
            t.kinds.join(" ")
        );
        match &t.structure_error {
            None => s += "transcript structure: ok\n",
            Some(e) => s += &format!("transcript structure: FAIL ({e})\n"),
        }
        let r = &self.resources;
        s += &format!(
            "resources: {} R gate(s), {} aux qubit(s), {} bit(s) client->server, {} bit(s) server->client, {} measurement report(s)\n",
            r.r_gate_count,
            r.aux_qubits_sent,
            r.classical_bits_client_to_server,
            r.classical_bits_server_to_client,
            r.measurement_reports
        );
        if let Some(f) = self.frames_after_handshake {
            s += &format!("frames after handshake: {f}\n");
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub circuit_hash: String,
    pub strategy_name: String,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub strategy_wall_ms: f64,
    /// `None` where no simulator is involved.
    pub simulator_wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub pass: bool,
    pub circuit_hash: String,
    pub level: String,
    pub transcript_messages: usize,
    pub clifford_only: bool,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{SCHEMA} audit ({})\ncircuit-hash: {}\n",
            self.level, self.circuit_hash
        );
        s += &format!(
            "transcript: {} message(s){}\n",
            self.transcript_messages,
            if self.clifford_only {
                " (Clifford only, no interaction)"
            } else {
                ""
            }
        );
        for c in &self.checks {
            s += &format!(
                "{} {} [{}] {} = {} (tolerance {}) strategy {} ms",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.strategy_name,
                c.metric,
                num(c.value),
                num(c.tolerance),
                num(c.strategy_wall_ms),
            );
            if let Some(sim) = c.simulator_wall_ms {
                s += &format!(" simulator {} ms", num(sim));
            }
            s.push('\n');
        }
        s += &format!("overall: {}\n", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityLine {
    pub family: String,
    pub name: String,
    pub cases: usize,
    pub min_fidelity: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub pass: bool,
    pub r_perturbation: f64,
    pub checks: Vec<IdentityLine>,
}

impl IdentityReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("{SCHEMA} verify-identities\n");
        if self.r_perturbation != 0.0 {
            s += &format!("R phase perturbed by {}\n", num(self.r_perturbation));
        }
        for c in &self.checks {
            s += &format!(
                "{} {}/{} min-fidelity {} over {} case(s) (tolerance {})\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.family,
                c.name,
                num(c.min_fidelity),
                c.cases,
                num(c.tolerance)
            );
        }
        s += &format!("overall: {}\n", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}
