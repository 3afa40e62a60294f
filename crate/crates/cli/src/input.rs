use std::fmt;
use std::str::FromStr;

use qced_core::qcore::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `--input`: a computational-basis string such as `010`, or `random:<seed>`
/// for a seeded random product state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSpec {
    Basis(String),
    Random(u64),
}

impl FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(InputSpec::Random)
                .map_err(|_| format!("bad seed in `{s}`"));
        }
        if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(format!(
                "input `{s}` is neither a 0/1 string nor random:<seed>"
            ));
        }
        Ok(InputSpec::Basis(s.to_string()))
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Basis(b) => f.write_str(b),
            InputSpec::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl InputSpec {
    pub fn state(&self, wires: usize) -> Result<StateVector, String> {
        match self {
            InputSpec::Basis(bits) => {
                if bits.len() != wires {
                    return Err(format!(
                        "input has {} bit(s), circuit has {wires} wire(s)",
                        bits.len()
                    ));
                }
                StateVector::from_bitstring(bits).map_err(|e| e.to_string())
            }
            InputSpec::Random(seed) => Ok(StateVector::random_product(
                wires,
                &mut ChaCha8Rng::seed_from_u64(*seed),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(
            "010".parse::<InputSpec>().unwrap(),
            InputSpec::Basis("010".into())
        );
        assert_eq!(
            "random:9".parse::<InputSpec>().unwrap(),
            InputSpec::Random(9)
        );
        assert!("".parse::<InputSpec>().is_err());
        assert!("01a".parse::<InputSpec>().is_err());
        assert!("random:x".parse::<InputSpec>().is_err());
    }

    #[test]
    fn width_is_checked() {
        assert!(InputSpec::Basis("01".into()).state(3).is_err());
        let a = InputSpec::Random(4).state(2).unwrap();
        let b = InputSpec::Random(4).state(2).unwrap();
        assert_eq!(a, b);
        assert_eq!(InputSpec::Random(4).to_string(), "random:4");
    }
}
