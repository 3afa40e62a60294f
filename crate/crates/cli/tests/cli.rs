use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn qced() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qced"));
    c.env_remove("QCED_SEED");
    c
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn run(args: &[&str], circuit: &Path) -> Output {
    qced()
        .args(args)
        .arg("--circuit")
        .arg(circuit)
        .output()
        .unwrap()
}

#[test]
fn run_bell_reports_two_wires() {
    let dir = TempDir::new().unwrap();
    let bell = write(&dir, "bell.qc", "qubits 2\nH 0\nCNOT 0 1\n");
    let out = run(
        &["run", "--input", "00", "--seed", "7", "--format", "json"],
        &bell,
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "qced-report/1");
    assert_eq!(v["command"], "run");
    assert_eq!(v["output"].as_array().unwrap().len(), 4);
    let amp = v["output"][0][0].as_f64().unwrap();
    assert!((amp.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert_eq!(v["transcript"]["messages"], 2);
}

#[test]
fn malformed_circuit_exits_2_with_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.qc", "qubits 1\nH 0\nCNOT 0\n");
    let out = run(&["run", "--input", "0"], &bad);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        qced().args(["run"]).output().unwrap().status.code(),
        Some(2)
    );
    assert_eq!(
        qced().args(["frobnicate"]).output().unwrap().status.code(),
        Some(2)
    );
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.qc", "qubits 2\nH 0\n");
    assert_eq!(run(&["run", "--input", "0"], &c).status.code(), Some(2));
    assert_eq!(
        run(&["run", "--input", "random:x"], &c).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["run", "--input", "00", "--mode", "client"], &c)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qced().arg("--help").output().unwrap().status.code(),
        Some(0)
    );
}

#[test]
fn seed_env_var_is_the_default() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.qc", "qubits 2\nH 0\nR 0\nMEASURE 0\nR 1\n");
    let a = qced()
        .env("QCED_SEED", "31")
        .args([
            "run",
            "--input",
            "random:2",
            "--format",
            "json",
            "--circuit",
        ])
        .arg(&c)
        .output()
        .unwrap();
    let b = run(
        &[
            "run", "--input", "random:2", "--format", "json", "--seed", "31",
        ],
        &c,
    );
    assert_eq!(json(&a), json(&b));
    assert_eq!(json(&a)["seed"], 31);
}

#[test]
fn client_server_pair_matches_local() {
    let dir = TempDir::new().unwrap();
    let c = write(
        &dir,
        "c.qc",
        "qubits 2\nH 0\nR 0\nCNOT 0 1\nMEASURE 1\nR 0\n",
    );
    let mut server = qced()
        .args([
            "run",
            "--mode",
            "server",
            "--seed",
            "41",
            "--format",
            "json",
            "--circuit",
        ])
        .arg(&c)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let port = line.trim().rsplit(':').next().unwrap().to_string();
    let client = run(
        &[
            "run", "--mode", "client", "--port", &port, "--input", "random:5", "--seed", "9",
            "--format", "json",
        ],
        &c,
    );
    let server = server.wait_with_output().unwrap();
    assert_eq!(
        client.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&client.stderr)
    );
    assert_eq!(server.status.code(), Some(0));
    let local = run(
        &[
            "run",
            "--input",
            "random:5",
            "--seed",
            "9",
            "--server-seed",
            "41",
            "--format",
            "json",
        ],
        &c,
    );
    let (client, local, server) = (json(&client), json(&local), json(&server));
    assert_eq!(client["server_seed"], 41);
    assert_eq!(client["output"], local["output"]);
    assert_eq!(client["plaintext_bits"], local["plaintext_bits"]);
    assert_eq!(client["transcript"], local["transcript"]);
    assert_eq!(
        server["transcript"]["messages"],
        local["transcript"]["messages"]
    );
    assert_eq!(
        client["frames_after_handshake"],
        server["frames_after_handshake"]
    );
}

#[test]
fn audit_passes_and_notes_clifford_transcript() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.qc", "qubits 1\nR 0\n");
    let out = run(&["audit", "--format", "json"], &r);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    for check in v["checks"].as_array().unwrap() {
        for key in [
            "circuit_hash",
            "strategy_name",
            "metric",
            "value",
            "tolerance",
            "pass",
            "strategy_wall_ms",
            "simulator_wall_ms",
        ] {
            assert!(check.get(key).is_some(), "missing {key}");
        }
    }
    let cl = write(&dir, "cl.qc", "qubits 2\nH 0\nCNOT 0 1\nP 1\n");
    let v = json(&run(&["audit", "--format", "json"], &cl));
    assert_eq!(v["pass"], true);
    assert_eq!(v["clifford_only"], true);
    assert_eq!(v["transcript_messages"], 2);
}

#[test]
fn audit_catches_leaking_fixture() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.qc", "qubits 1\nH 0\nR 0\n");
    let out = run(&["audit", "--fixture", "leak-key"], &r);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL ciphertext-mixedness"));
}

#[test]
fn monte_carlo_audit_runs() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.qc", "qubits 1\nR 0\n");
    let out = run(
        &[
            "audit",
            "--level",
            "monte-carlo",
            "--samples",
            "4000",
            "--format",
            "json",
        ],
        &r,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["level"], "monte-carlo:4000");
}

#[test]
fn identities_pass_and_perturbed_r_fails() {
    let out = qced()
        .args(["verify-identities", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(!v["checks"].as_array().unwrap().is_empty());
    assert_eq!(v["pass"], true);

    let out = qced()
        .args([
            "verify-identities",
            "--perturb-r",
            "1e-3",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let rx = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "RX=XZPR")
        .unwrap();
    assert_eq!(rx["pass"], false);
}

#[test]
fn text_and_json_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.qc", "qubits 1\nR 0\n");
    let text = String::from_utf8(run(&["audit", "--seed", "3"], &r).stdout).unwrap();
    let v = json(&run(&["audit", "--seed", "3", "--format", "json"], &r));
    for check in v["checks"].as_array().unwrap() {
        let value = serde_json::to_string(&check["value"]).unwrap();
        assert!(
            text.contains(&format!("= {value} ")),
            "{value} not in\n{text}"
        );
    }
    let text =
        String::from_utf8(qced().args(["verify-identities"]).output().unwrap().stdout).unwrap();
    let v: Value = serde_json::from_slice(
        &qced()
            .args(["verify-identities", "--format", "json"])
            .output()
            .unwrap()
            .stdout,
    )
    .unwrap();
    for check in v["checks"].as_array().unwrap() {
        let f = serde_json::to_string(&check["min_fidelity"]).unwrap();
        assert!(text.contains(&format!(
            "{}/{} min-fidelity {f} ",
            check["family"].as_str().unwrap(),
            check["name"].as_str().unwrap()
        )));
    }
}
