//! Computational-basis measurement of a single wire.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::ZERO;
use super::state::{bit_of, StateVector};
use super::QcoreError;

/// Outcomes below this probability are treated as impossible.
pub const IMPOSSIBLE: f64 = 1e-14;

/// One measurement outcome: its probability and the renormalised post-state
/// (absent when the outcome is impossible). The measured wire stays in the
/// register, collapsed to `|bit⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureBranch {
    pub bit: bool,
    pub probability: f64,
    pub state: Option<StateVector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    /// Enumerate both outcomes.
    Branch,
    /// Draw one outcome from a generator seeded with this value.
    Sample(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureResult {
    Branches([MeasureBranch; 2]),
    Sampled { bit: bool, state: StateVector },
}

fn project(state: &StateVector, wire: usize, bit: bool) -> (f64, Option<StateVector>) {
    let mask = bit_of(state.num_wires(), wire);
    let amps: Vec<_> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if (i & mask != 0) == bit { *a } else { ZERO })
        .collect();
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p < IMPOSSIBLE {
        return (p, None);
    }
    let s = StateVector::from_unnormalized(state.num_wires(), amps).ok();
    (p, s)
}

/// Both outcomes with probabilities and post-states.
pub fn measure_branches(
    state: &StateVector,
    wire: usize,
) -> Result<[MeasureBranch; 2], QcoreError> {
    state.check_wires(&[wire])?;
    let (p0, s0) = project(state, wire, false);
    let (p1, s1) = project(state, wire, true);
    Ok([
        MeasureBranch {
            bit: false,
            probability: p0,
            state: s0,
        },
        MeasureBranch {
            bit: true,
            probability: p1,
            state: s1,
        },
    ])
}

/// Draws one outcome using `rng`.
pub fn measure_sample<R: Rng + ?Sized>(
    state: &StateVector,
    wire: usize,
    rng: &mut R,
) -> Result<(bool, StateVector), QcoreError> {
    let [zero, one] = measure_branches(state, wire)?;
    let draw: f64 = rng.random();
    let pick = match (&zero.state, &one.state) {
        (Some(_), None) => zero,
        (None, Some(_)) => one,
        _ if draw < zero.probability / (zero.probability + one.probability) => zero,
        _ => one,
    };
    Ok((
        pick.bit,
        pick.state.expect("a possible outcome has a post-state"),
    ))
}

pub fn measure_wire(
    state: &StateVector,
    wire: usize,
    mode: MeasureMode,
) -> Result<MeasureResult, QcoreError> {
    match mode {
        MeasureMode::Branch => measure_branches(state, wire).map(MeasureResult::Branches),
        MeasureMode::Sample(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            measure_sample(state, wire, &mut rng)
                .map(|(bit, state)| MeasureResult::Sampled { bit, state })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::fidelity_up_to_global_phase;

    #[test]
    fn plus_is_even() {
        let [a, b] = measure_branches(&StateVector::plus(), 0).unwrap();
        assert!((a.probability - 0.5).abs() < 1e-12 && (b.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_is_certain() {
        let [a, b] = measure_branches(&StateVector::from_bitstring("1").unwrap(), 0).unwrap();
        assert!(a.probability < 1e-15 && a.state.is_none());
        assert!((b.probability - 1.0).abs() < 1e-15);
        match measure_wire(
            &StateVector::from_bitstring("1").unwrap(),
            0,
            MeasureMode::Sample(5),
        )
        .unwrap()
        {
            MeasureResult::Sampled { bit, .. } => assert!(bit),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bell_collapse() {
        let [zero, _] = measure_branches(&StateVector::epr(), 0).unwrap();
        let post = zero.state.unwrap();
        let expect = StateVector::from_bitstring("00").unwrap();
        assert!((fidelity_up_to_global_phase(&post, &expect).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = measure_wire(&StateVector::plus(), 0, MeasureMode::Sample(42)).unwrap();
        let b = measure_wire(&StateVector::plus(), 0, MeasureMode::Sample(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn range_checked() {
        assert!(measure_branches(&StateVector::plus(), 1).is_err());
    }
}
