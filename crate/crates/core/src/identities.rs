//! Static suite of gate identities, circuit identities, per-gadget key tables
//! and the four-step R-gadget derivation, all checked by simulation.
//!
//! Every check reports the worst fidelity seen over its cases. Matrices are
//! compared with `|tr(A†B)|² / d²`, states with `|⟨ψ|φ⟩|²`, classical outcome
//! distributions with the Bhattacharyya fidelity. A check passes when the
//! worst case is at least `1 − tolerance`.
//!
//! The R matrix is a parameter so that a perturbed gate can be fed in and the
//! suite shown to notice.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::keytrack::{
    update_aux, update_cnot, update_h, update_measure, update_p, update_r, update_x, update_z,
    PauliKey, RGateRandomness,
};
use crate::par::{map_collect, Execution};
use crate::qcore::{
    fidelity_up_to_global_phase, measure_branches, p_power, pauli, Gate, Matrix, QcoreError,
    StateVector, ALGEBRAIC_TOL, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityFamily {
    Gate,
    Circuit,
    KeyTable,
    Derivation,
}

impl IdentityFamily {
    pub fn name(self) -> &'static str {
        match self {
            IdentityFamily::Gate => "gate",
            IdentityFamily::Circuit => "circuit",
            IdentityFamily::KeyTable => "key-table",
            IdentityFamily::Derivation => "derivation",
        }
    }
}

impl fmt::Display for IdentityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub family: IdentityFamily,
    pub name: &'static str,
    pub cases: usize,
    pub min_fidelity: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct IdentityOptions {
    /// The single-qubit matrix used wherever the suite needs R.
    pub r: Matrix,
    /// Random input states per key case.
    pub states_per_case: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub exec: Execution,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            r: Gate::R.matrix().into_matrix(),
            states_per_case: 50,
            seed: 0x1de7,
            tolerance: ALGEBRAIC_TOL,
            exec: Execution::default(),
        }
    }
}

/// `diag(1, e^{i(π/4 + eps)})`.
pub fn perturbed_r(eps: f64) -> Matrix {
    Matrix::diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, FRAC_PI_4 + eps)])
}

pub fn verify_identities(opts: &IdentityOptions) -> Result<IdentityReport, QcoreError> {
    if opts.r.dim() != 2 {
        return Err(QcoreError::DimensionMismatch {
            expected: 2,
            found: opts.r.dim(),
        });
    }
    let kit = Kit::new(opts);
    let runs = map_collect(opts.exec, &CHECKS, |(family, name, f)| {
        f(&kit, seed_for(opts.seed, name)).map(|(cases, min_fidelity)| IdentityCheck {
            family: *family,
            name,
            cases,
            min_fidelity,
            passed: min_fidelity >= 1.0 - opts.tolerance,
        })
    });
    Ok(IdentityReport {
        tolerance: opts.tolerance,
        checks: runs.into_iter().collect::<Result<_, _>>()?,
    })
}

type CheckFn = fn(&Kit, u64) -> Result<(usize, f64), QcoreError>;

const CHECKS: [(IdentityFamily, &str, CheckFn); 24] = [
    (IdentityFamily::Gate, "XZ=ZX", gate_xz),
    (IdentityFamily::Gate, "PZ=ZP", gate_pz),
    (IdentityFamily::Gate, "PX=XZP", gate_px),
    (IdentityFamily::Gate, "RZ=ZR", gate_rz),
    (IdentityFamily::Gate, "RX=XZPR", gate_rx),
    (IdentityFamily::Gate, "P^2=Z", gate_p2),
    (IdentityFamily::Gate, "P^(a^b)=Z^(ab)P^(a+b)", gate_p_xor),
    (IdentityFamily::Circuit, "x-teleport", circuit_x_teleport),
    (IdentityFamily::Circuit, "p-commutes", circuit_p_commutes),
    (IdentityFamily::Circuit, "z-commutes", circuit_z_commutes),
    (IdentityFamily::Circuit, "qubit-prep", circuit_qubit_prep),
    (IdentityFamily::KeyTable, "measure", table_measure),
    (IdentityFamily::KeyTable, "aux", table_aux),
    (IdentityFamily::KeyTable, "x", table_x),
    (IdentityFamily::KeyTable, "z", table_z),
    (IdentityFamily::KeyTable, "h", table_h),
    (IdentityFamily::KeyTable, "p", table_p),
    (IdentityFamily::KeyTable, "cnot", table_cnot),
    (IdentityFamily::KeyTable, "r-naive", table_r_naive),
    (IdentityFamily::KeyTable, "r-gadget", table_r_gadget),
    (IdentityFamily::Derivation, "step1-swap", step1_swap),
    (
        IdentityFamily::Derivation,
        "step2-x-teleport",
        circuit_x_teleport,
    ),
    (
        IdentityFamily::Derivation,
        "step3-r-teleport",
        step3_r_teleport,
    ),
    (IdentityFamily::Derivation, "step4-r-gadget", step4_r_gadget),
];

fn seed_for(base: u64, name: &str) -> u64 {
    name.bytes().fold(base ^ 0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

const BITS: [bool; 2] = [false, true];

struct Kit {
    x: Matrix,
    z: Matrix,
    h: Matrix,
    p: Matrix,
    r: Matrix,
    cnot: Matrix,
    states: usize,
}

impl Kit {
    fn new(opts: &IdentityOptions) -> Self {
        Self {
            x: Gate::X.matrix().into_matrix(),
            z: Gate::Z.matrix().into_matrix(),
            h: Gate::H.matrix().into_matrix(),
            p: Gate::P.matrix().into_matrix(),
            r: opts.r.clone(),
            cnot: Gate::Cnot.matrix().into_matrix(),
            states: opts.states_per_case,
        }
    }

    fn random_states(&self, wires: usize, seed: u64) -> Vec<StateVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.states)
            .map(|_| StateVector::random(wires, &mut rng))
            .collect()
    }
}

fn op_fidelity(a: &Matrix, b: &Matrix) -> f64 {
    let d = a.dim() as f64;
    (a.adjoint().mul(b).trace().norm() / d).powi(2).min(1.0)
}

fn pow(m: &Matrix, k: bool) -> Matrix {
    if k {
        m.clone()
    } else {
        Matrix::identity(m.dim())
    }
}

fn prod(ms: &[&Matrix]) -> Matrix {
    ms.iter()
        .fold(Matrix::identity(ms[0].dim()), |acc, m| acc.mul(m))
}

struct Worst {
    cases: usize,
    min: f64,
}

impl Worst {
    fn new() -> Self {
        Self { cases: 0, min: 1.0 }
    }

    fn add(&mut self, fidelity: f64) {
        self.cases += 1;
        self.min = self.min.min(fidelity);
    }

    fn done(self) -> Result<(usize, f64), QcoreError> {
        Ok((self.cases, self.min))
    }
}

fn gate_xz(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    w.add(op_fidelity(&k.x.mul(&k.z), &k.z.mul(&k.x)));
    w.done()
}

fn gate_pz(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    w.add(op_fidelity(&k.p.mul(&k.z), &k.z.mul(&k.p)));
    w.done()
}

fn gate_px(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    w.add(op_fidelity(&k.p.mul(&k.x), &prod(&[&k.x, &k.z, &k.p])));
    w.done()
}

fn gate_rz(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    w.add(op_fidelity(&k.r.mul(&k.z), &k.z.mul(&k.r)));
    w.done()
}

fn gate_rx(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    w.add(op_fidelity(
        &k.r.mul(&k.x),
        &prod(&[&k.x, &k.z, &k.p, &k.r]),
    ));
    w.done()
}

fn gate_p2(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    w.add(op_fidelity(&k.p.mul(&k.p), &k.z));
    w.done()
}

fn gate_p_xor(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    for a in BITS {
        for b in BITS {
            let lhs = p_power((a ^ b) as u32);
            let rhs = pow(&k.z, a & b).mul(&p_power(a as u32 + b as u32));
            w.add(op_fidelity(&lhs, &rhs));
        }
    }
    w.done()
}

/// Measures `wire` and returns the remaining wires for outcome `bit`, or
/// `None` when that outcome cannot occur.
fn branch(state: &StateVector, wire: usize, bit: bool) -> Result<Option<StateVector>, QcoreError> {
    let [zero, one] = measure_branches(state, wire)?;
    let b = if bit { one } else { zero };
    b.state
        .map(|s| s.remove_collapsed_wire(wire, bit))
        .transpose()
}

/// Fidelity of outcome `c` against `expect`; an impossible outcome scores 0.
fn branch_fidelity(
    state: &StateVector,
    wire: usize,
    c: bool,
    expect: &StateVector,
) -> Result<f64, QcoreError> {
    match branch(state, wire, c)? {
        Some(rest) => fidelity_up_to_global_phase(&rest, expect),
        None => Ok(0.0),
    }
}

/// ψ on wire 0, |+⟩ on wire 1 with `pre` applied, CNOT from 1 onto 0,
/// measure wire 0. Expects `post · X^c ψ` on the survivor.
fn teleport_case(k: &Kit, seed: u64, pre: &Matrix) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    for psi in k.random_states(1, seed) {
        let plus = StateVector::plus().apply_matrix(pre, &[0])?;
        let s = psi.tensor(&plus).apply_matrix(&k.cnot, &[1, 0])?;
        for c in BITS {
            let expect = psi.apply_matrix(&pre.mul(&pow(&k.x, c)), &[0])?;
            w.add(branch_fidelity(&s, 0, c, &expect)?);
        }
    }
    w.done()
}

fn circuit_x_teleport(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    teleport_case(k, seed, &Matrix::identity(2))
}

fn circuit_p_commutes(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    teleport_case(k, seed, &k.p)
}

fn circuit_z_commutes(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    teleport_case(k, seed, &k.z)
}

fn circuit_qubit_prep(k: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    for y in BITS {
        let s = StateVector::zero(2)?
            .apply_matrix(&k.h, &[0])?
            .apply_matrix(&k.cnot, &[0, 1])?
            .apply_matrix(&pow(&k.p, y), &[1])?
            .apply_matrix(&k.h, &[1])?;
        for d in BITS {
            let expect =
                StateVector::plus().apply_matrix(&pow(&k.z, d).mul(&pow(&k.p, y)), &[0])?;
            w.add(branch_fidelity(&s, 1, d, &expect)?);
        }
    }
    w.done()
}

/// Runs `gate` on `X^a Z^b ψ` for every key and random ψ, comparing with the
/// stated output label and with decryption under `update`.
fn single_table(
    k: &Kit,
    seed: u64,
    gate: &Matrix,
    label: impl Fn(bool, bool) -> Matrix,
    update: Option<fn(PauliKey) -> PauliKey>,
) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let states = k.random_states(1, seed);
    for key in PauliKey::all() {
        for psi in &states {
            let out = psi.apply_matrix(&gate.mul(&pauli(key.x, key.z)), &[0])?;
            w.add(fidelity_up_to_global_phase(
                &out,
                &psi.apply_matrix(&label(key.x, key.z), &[0])?,
            )?);
            if let Some(update) = update {
                let k2 = update(key);
                let plain = out.apply_matrix(&pauli(k2.x, k2.z).adjoint(), &[0])?;
                let want = psi.apply_matrix(gate, &[0])?;
                w.add(fidelity_up_to_global_phase(&plain, &want)?);
            }
        }
    }
    w.done()
}

fn table_x(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    single_table(k, seed, &k.x, |a, b| pauli(a, b).mul(&k.x), Some(update_x))
}

fn table_z(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    single_table(k, seed, &k.z, |a, b| pauli(a, b).mul(&k.z), Some(update_z))
}

fn table_h(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    single_table(k, seed, &k.h, |a, b| pauli(b, a).mul(&k.h), Some(update_h))
}

fn table_p(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    single_table(
        k,
        seed,
        &k.p,
        |a, b| pauli(a, a ^ b).mul(&k.p),
        Some(update_p),
    )
}

fn table_r_naive(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    single_table(
        k,
        seed,
        &k.r,
        |a, b| prod(&[&pauli(a, a ^ b), &pow(&k.p, a), &k.r]),
        None,
    )
}

fn table_cnot(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let states = k.random_states(2, seed);
    for kc in PauliKey::all() {
        for kt in PauliKey::all() {
            let (a, b, c, d) = (kc.x, kc.z, kt.x, kt.z);
            let pad = pauli(a, b).kron(&pauli(c, d));
            let label = pauli(a, b ^ d).kron(&pauli(a ^ c, d)).mul(&k.cnot);
            let (uc, ut) = update_cnot(kc, kt);
            let unpad = pauli(uc.x, uc.z).kron(&pauli(ut.x, ut.z)).adjoint();
            for psi in &states {
                let out = psi.apply_matrix(&k.cnot.mul(&pad), &[0, 1])?;
                let plain = psi.apply_matrix(&k.cnot, &[0, 1])?;
                w.add(fidelity_up_to_global_phase(
                    &out,
                    &psi.apply_matrix(&label, &[0, 1])?,
                )?);
                w.add(fidelity_up_to_global_phase(
                    &out.apply_matrix(&unpad, &[0, 1])?,
                    &plain,
                )?);
            }
        }
    }
    w.done()
}

/// Server measures `X^a Z^b ψ` and sees `a ⊕ y`: the reported distribution,
/// relabelled by the decoded bit, must equal the plaintext one.
fn table_measure(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let states = k.random_states(1, seed);
    for key in PauliKey::all() {
        for psi in &states {
            let plain = psi.prob_one(0)?;
            let cipher = psi.apply_matrix(&pauli(key.x, key.z), &[0])?.prob_one(0)?;
            let mut decoded = [0.0; 2];
            for r in BITS {
                let pr = if r { cipher } else { 1.0 - cipher };
                // the label says r = a ⊕ y
                if update_measure(key, r) != r ^ key.x {
                    return Ok((w.cases + 1, 0.0));
                }
                decoded[(r ^ key.x) as usize] += pr;
            }
            let bc = (decoded[0] * (1.0 - plain)).sqrt() + (decoded[1] * plain).sqrt();
            w.add(bc * bc);
        }
    }
    w.done()
}

fn table_aux(_: &Kit, _: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let key = update_aux();
    let zero = StateVector::zero(1)?;
    let labelled = zero.apply_matrix(&pauli(false, false), &[0])?;
    w.add(fidelity_up_to_global_phase(&zero, &labelled)? * f64::from(key == PauliKey::default()));
    w.done()
}

/// The full R gadget on two wires: ciphertext on 0, aux on 1.
/// Returns the survivor after outcome `c`.
fn r_gadget(
    k: &Kit,
    psi: &StateVector,
    key: PauliKey,
    y: bool,
    d: bool,
    c: bool,
) -> Result<Option<StateVector>, QcoreError> {
    let input = psi.apply_matrix(&pauli(key.x, key.z), &[0])?;
    let aux = StateVector::plus().apply_matrix(&pow(&k.z, d).mul(&pow(&k.p, y)), &[0])?;
    let s = input
        .tensor(&aux)
        .apply_matrix(&k.r, &[0])?
        .apply_matrix(&k.cnot, &[1, 0])?;
    branch(&s, 0, c)?
        .map(|rest| rest.apply_matrix(&pow(&k.p, key.x ^ y), &[0]))
        .transpose()
}

fn table_r_gadget(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let states = k.random_states(1, seed);
    for key in PauliKey::all() {
        for y in BITS {
            for d in BITS {
                for c in BITS {
                    let next = update_r(key, RGateRandomness { p: y, z: d }, c);
                    for psi in &states {
                        let want = psi.apply_matrix(&k.r, &[0])?;
                        let f = match r_gadget(k, psi, key, y, d, c)? {
                            Some(out) => fidelity_up_to_global_phase(
                                &out.apply_matrix(&pauli(next.x, next.z).adjoint(), &[0])?,
                                &want,
                            )?,
                            None => 0.0,
                        };
                        w.add(f);
                    }
                }
            }
        }
    }
    w.done()
}

fn step1_swap(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    for psi in k.random_states(1, seed) {
        let out = psi
            .tensor(&StateVector::plus())
            .apply_matrix(&k.cnot, &[1, 0])?
            .apply_matrix(&k.cnot, &[0, 1])?;
        w.add(fidelity_up_to_global_phase(
            &out,
            &StateVector::plus().tensor(&psi),
        )?);
    }
    w.done()
}

fn step3_r_teleport(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let states = k.random_states(1, seed);
    for key in PauliKey::all() {
        let (a, b) = (key.x, key.z);
        for psi in &states {
            let s = psi
                .apply_matrix(&k.r.mul(&pauli(a, b)), &[0])?
                .tensor(&StateVector::plus())
                .apply_matrix(&k.cnot, &[1, 0])?;
            for c in BITS {
                let label = prod(&[&pauli(a ^ c, a ^ b), &pow(&k.p, a), &k.r]);
                w.add(branch_fidelity(&s, 0, c, &psi.apply_matrix(&label, &[0])?)?);
            }
        }
    }
    w.done()
}

fn step4_r_gadget(k: &Kit, seed: u64) -> Result<(usize, f64), QcoreError> {
    let mut w = Worst::new();
    let states = k.random_states(1, seed);
    for key in PauliKey::all() {
        let (a, b) = (key.x, key.z);
        for y in BITS {
            for d in BITS {
                for c in BITS {
                    let label = pauli(a ^ c, (a & !(c ^ y)) ^ b ^ d ^ y).mul(&k.r);
                    for psi in &states {
                        let f = match r_gadget(k, psi, key, y, d, c)? {
                            Some(out) => {
                                fidelity_up_to_global_phase(&out, &psi.apply_matrix(&label, &[0])?)?
                            }
                            None => 0.0,
                        };
                        w.add(f);
                    }
                }
            }
        }
    }
    w.done()
}
