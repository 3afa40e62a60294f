//! The `qced` command line: delegated runs (in-process or over TCP), privacy
//! audits and the identity suite.
//!
//! Exit codes are stable: `0` success, `1` a tolerance or protocol failure,
//! `2` a usage, parse or validation error. `--format json` prints one
//! `qced-report/1` object.

pub mod audit;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qced_core::circuits::{parse_circuit, resources, Circuit};
use qced_core::engine::{
    check_transcript_structure, run_delegation_with, AuxTiming, RunOptions, Transcript,
};
use qced_core::identities::{perturbed_r, verify_identities, IdentityOptions};
use qced_core::qcore::StateVector;
use qced_core::security::AuditLevel;
use qced_transport::{connect_with, serve_connection, SessionOptions};
use serde::Serialize;

use crate::audit::{run_audit, AuditConfig, Fixture};
use crate::input::InputSpec;
use crate::report::{IdentityLine, IdentityReport, RunReport, TranscriptSummary, SCHEMA};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Default for every `--seed`.
pub const SEED_ENV: &str = "QCED_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "qced",
    version,
    about = "Delegated quantum computation on one-time-pad encrypted registers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a circuit through the delegation protocol.
    Run(RunArgs),
    /// Check what a server could learn from delegating a circuit.
    Audit(AuditArgs),
    /// Check the gate, circuit and key-update identities the protocol rests on.
    VerifyIdentities(IdentityArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Local,
    Client,
    Server,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AuxTimingArg {
    AtGate,
    FrontLoaded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Exhaustive,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FixtureArg {
    None,
    LeakKey,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Basis string such as `010`, or `random:<seed>`. Not used by the server.
    #[arg(long)]
    pub input: Option<InputSpec>,
    /// Client seed (server seed in server mode).
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Seed for the server's measurements in local mode; defaults to `--seed`.
    #[arg(long)]
    pub server_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Local)]
    pub mode: Mode,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Required for the client; the server binds an ephemeral port when omitted.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = AuxTimingArg::AtGate)]
    pub aux_timing: AuxTimingArg,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long, value_enum, default_value_t = LevelArg::Exhaustive)]
    pub level: LevelArg,
    /// Samples per input for Monte Carlo.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = FixtureArg::None, hide = true)]
    pub fixture: FixtureArg,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Shift R's phase by this much (a sensitivity fixture).
    #[arg(
        long,
        default_value_t = 0.0,
        hide = true,
        allow_negative_numbers = true
    )]
    pub perturb_r: f64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Audit(a) => cmd_audit(&a, out),
        Command::VerifyIdentities(a) => cmd_verify_identities(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "qced: {message}");
            code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FAIL,
        message: message.into(),
    }
}

fn load_circuit(path: &PathBuf) -> Result<Circuit, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_circuit(&text).map_err(|e| usage(format!("{}:\n{e}", path.display())))
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    report: &T,
    text: String,
) -> Result<(), Failure> {
    let body = match format {
        Format::Text => text,
        Format::Json => {
            serde_json::to_string_pretty(report).map_err(|e| fail(e.to_string()))? + "\n"
        }
    };
    out.write_all(body.as_bytes())
        .map_err(|e| fail(e.to_string()))
}

fn summary(circuit: &Circuit, transcript: &Transcript) -> TranscriptSummary {
    let check = check_transcript_structure(circuit, transcript);
    TranscriptSummary {
        messages: transcript.len(),
        kinds: transcript
            .kinds()
            .iter()
            .map(|k| k.name().to_string())
            .collect(),
        structure_ok: check.is_ok(),
        structure_error: check.err(),
    }
}

fn amplitudes(s: &StateVector) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    let circuit = load_circuit(&a.circuit)?;
    let aux_timing = match a.aux_timing {
        AuxTimingArg::AtGate => AuxTiming::AtGate,
        AuxTimingArg::FrontLoaded => AuxTiming::FrontLoaded,
    };
    let session = SessionOptions {
        timeout: Duration::from_secs(a.timeout_secs),
        aux_timing,
    };
    let input = match (a.mode, &a.input) {
        (Mode::Server, _) => None,
        (_, None) => return Err(usage("--input is required in local and client mode")),
        (_, Some(spec)) => Some((spec, spec.state(circuit.initial_wires()).map_err(usage)?)),
    };
    let mut report = RunReport {
        schema: SCHEMA,
        command: "run",
        pass: true,
        mode: format!("{:?}", a.mode).to_lowercase(),
        circuit_hash: circuit.hash_hex(),
        seed: a.seed,
        server_seed: None,
        input: input.as_ref().map(|(spec, _)| spec.to_string()),
        output: None,
        plaintext_bits: Default::default(),
        transcript: summary(&circuit, &Transcript::new()),
        resources: resources(&circuit).into(),
        frames_after_handshake: None,
    };
    match a.mode {
        Mode::Local => {
            let (_, state) = input.expect("checked above");
            let opts = RunOptions {
                client_seed: a.seed,
                server_seed: a.server_seed.unwrap_or(a.seed),
                aux_timing,
                x_rule: None,
            };
            let run =
                run_delegation_with(&circuit, &state, &opts).map_err(|e| fail(e.to_string()))?;
            report.server_seed = Some(opts.server_seed);
            report.output = Some(amplitudes(&run.output));
            report.plaintext_bits = run.plaintext_bits;
            report.transcript = summary(&circuit, &run.transcript);
        }
        Mode::Client => {
            let (_, state) = input.expect("checked above");
            let port = a
                .port
                .ok_or_else(|| usage("--port is required in client mode"))?;
            let run = connect_with((a.host.as_str(), port), &circuit, &state, a.seed, &session)
                .map_err(|e| fail(e.to_string()))?;
            report.server_seed = Some(run.server_seed);
            report.output = Some(amplitudes(&run.output));
            report.plaintext_bits = run.plaintext_bits;
            report.transcript = summary(&circuit, &run.transcript);
            report.frames_after_handshake = Some(run.frames.len());
        }
        Mode::Server => {
            let listener = TcpListener::bind((a.host.as_str(), a.port.unwrap_or(0)))
                .map_err(|e| fail(e.to_string()))?;
            let addr = listener.local_addr().map_err(|e| fail(e.to_string()))?;
            let _ = writeln!(err, "listening on {addr}");
            let _ = err.flush();
            let (stream, _) = listener.accept().map_err(|e| fail(e.to_string()))?;
            let run = serve_connection(stream, &circuit, a.seed, &session)
                .map_err(|e| fail(e.to_string()))?;
            report.transcript = summary(&circuit, &run.transcript);
            report.frames_after_handshake = Some(run.frames_after_handshake);
        }
    }
    report.pass = report.transcript.structure_ok;
    let text = report.to_text();
    emit(out, a.format, &report, text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_audit(a: &AuditArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let circuit = load_circuit(&a.circuit)?;
    let cfg = AuditConfig {
        level: match a.level {
            LevelArg::Exhaustive => AuditLevel::Exhaustive,
            LevelArg::MonteCarlo => AuditLevel::MonteCarlo {
                samples: a.samples,
                seed: a.seed,
            },
        },
        seed: a.seed,
        fixture: match a.fixture {
            FixtureArg::None => Fixture::None,
            FixtureArg::LeakKey => Fixture::LeakKey,
        },
        ..AuditConfig::default()
    };
    let report =
        run_audit(&circuit, &cfg).map_err(|e| usage(format!("cannot audit this circuit: {e}")))?;
    let text = report.to_text();
    emit(out, a.format, &report, text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_verify_identities(a: &IdentityArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let opts = IdentityOptions {
        r: perturbed_r(a.perturb_r),
        seed: a.seed,
        ..IdentityOptions::default()
    };
    let suite = verify_identities(&opts).map_err(|e| fail(e.to_string()))?;
    let report = IdentityReport {
        schema: SCHEMA,
        command: "verify-identities",
        pass: suite.all_passed(),
        r_perturbation: a.perturb_r,
        checks: suite
            .checks
            .iter()
            .map(|c| IdentityLine {
                family: c.family.to_string(),
                name: c.name.to_string(),
                cases: c.cases,
                min_fidelity: c.min_fidelity,
                tolerance: suite.tolerance,
                pass: c.passed,
            })
            .collect(),
    };
    let text = report.to_text();
    emit(out, a.format, &report, text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}
