//! Scripted server behaviour: extra actions the server performs at fixed
//! points of the run, on top of the honest gadget steps.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::circuits::Circuit;
use crate::qcore::{Gate, Matrix, C64};

/// When an action fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hook {
    AfterReceiveRegister,
    BeforeOp(usize),
    AfterOp(usize),
    /// After the aux qubit and bit of the `n`-th R gate arrive, before the
    /// server's gadget steps.
    AfterReceiveAux(usize),
    BeforeReturn,
}

/// A server-side wire, named by role.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WireRef {
    /// Logical circuit wire `k` of the register being computed on.
    Data(usize),
    /// Wire `j` of the server's prior register.
    Prior(usize),
    /// The `j`-th ancilla the strategy allocated.
    Ancilla(usize),
    /// The aux qubit of the R gate in progress.
    Aux,
}

#[derive(Clone, Debug)]
pub enum Action {
    Unitary {
        matrix: Matrix,
        wires: Vec<WireRef>,
    },
    /// Computational-basis measurement; the outcome joins the server record
    /// and the collapsed wire stays where it is.
    Measure(WireRef),
    /// A fresh `|0⟩` ancilla.
    AllocAncilla,
}

#[derive(Clone, Debug)]
pub struct ServerStrategy {
    name: String,
    prior_width: usize,
    steps: Vec<(Hook, Action)>,
}

impl ServerStrategy {
    pub fn new(name: impl Into<String>, prior_width: usize) -> Self {
        Self {
            name: name.into(),
            prior_width,
            steps: Vec::new(),
        }
    }

    pub fn with(mut self, hook: Hook, action: Action) -> Self {
        self.steps.push((hook, action));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn prior_width(&self) -> usize {
        self.prior_width
    }

    pub fn actions_at(&self, hook: Hook) -> impl Iterator<Item = &Action> {
        self.steps
            .iter()
            .filter(move |(h, _)| *h == hook)
            .map(|(_, a)| a)
    }

    pub fn is_passive(&self) -> bool {
        self.steps.is_empty()
    }

    /// Follows the protocol and keeps nothing.
    pub fn honest() -> Self {
        Self::new("honest", 0)
    }

    /// Measures every qubit it receives and keeps the outcomes.
    pub fn measure_everything(circuit: &Circuit) -> Self {
        let mut s = Self::new("measure-all", 0);
        for k in 0..circuit.initial_wires() {
            s = s.with(
                Hook::AfterReceiveRegister,
                Action::Measure(WireRef::Data(k)),
            );
        }
        for r in 0..circuit.r_gate_count() {
            s = s.with(Hook::AfterReceiveAux(r), Action::Measure(WireRef::Aux));
        }
        s
    }

    /// Scrambles the register on arrival and again before returning it, and
    /// every aux qubit on arrival.
    pub fn random_unitary(circuit: &Circuit, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = circuit.initial_wires();
        let wires: Vec<WireRef> = (0..n.min(2)).map(WireRef::Data).collect();
        let out: Vec<WireRef> = (0..circuit.final_wires().min(2))
            .map(WireRef::Data)
            .collect();
        let mut s = Self::new("random-unitary", 0).with(
            Hook::AfterReceiveRegister,
            Action::Unitary {
                matrix: random_unitary(1 << wires.len(), &mut rng),
                wires,
            },
        );
        for r in 0..circuit.r_gate_count() {
            s = s.with(
                Hook::AfterReceiveAux(r),
                Action::Unitary {
                    matrix: random_unitary(2, &mut rng),
                    wires: vec![WireRef::Aux],
                },
            );
        }
        s.with(
            Hook::BeforeReturn,
            Action::Unitary {
                matrix: random_unitary(1 << out.len(), &mut rng),
                wires: out,
            },
        )
    }

    /// Holds one prior qubit, copies the first data wire into it on arrival
    /// and entangles it back into the register before returning.
    pub fn entangle_with_prior() -> Self {
        let cnot = Gate::Cnot.matrix().into_matrix();
        Self::new("entangle-prior", 1)
            .with(
                Hook::AfterReceiveRegister,
                Action::Unitary {
                    matrix: cnot.clone(),
                    wires: vec![WireRef::Data(0), WireRef::Prior(0)],
                },
            )
            .with(Hook::BeforeReturn, Action::AllocAncilla)
            .with(
                Hook::BeforeReturn,
                Action::Unitary {
                    matrix: cnot.clone(),
                    wires: vec![WireRef::Prior(0), WireRef::Ancilla(0)],
                },
            )
            .with(
                Hook::BeforeReturn,
                Action::Unitary {
                    matrix: cnot,
                    wires: vec![WireRef::Prior(0), WireRef::Data(0)],
                },
            )
    }

    /// Flips the first data wire before returning: corrupts the result,
    /// learns nothing.
    pub fn bit_flip() -> Self {
        Self::new("bit-flip", 0).with(
            Hook::BeforeReturn,
            Action::Unitary {
                matrix: Gate::X.matrix().into_matrix(),
                wires: vec![WireRef::Data(0)],
            },
        )
    }

    /// Holds a prior register and never touches it.
    pub fn keep_prior(width: usize) -> Self {
        Self::new("keep-prior", width)
    }
}

/// The strategies every audit runs.
pub fn bundled_strategies(circuit: &Circuit, seed: u64) -> Vec<ServerStrategy> {
    vec![
        ServerStrategy::honest(),
        ServerStrategy::measure_everything(circuit),
        ServerStrategy::random_unitary(circuit, seed),
        ServerStrategy::entangle_with_prior(),
        ServerStrategy::bit_flip(),
    ]
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn random_unitary(dim: usize, rng: &mut ChaCha20Rng) -> Matrix {
    let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut data = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            data.push(q[(i, j)] * phase);
        }
    }
    Matrix::from_raw(dim, data)
}
