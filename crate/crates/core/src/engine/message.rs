//! Protocol messages, their byte payloads and transcripts.

use std::fmt;

use thiserror::Error;

use crate::qcore::{StateVector, C64, NORM_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ClientToServer => "C>S",
            Direction::ServerToClient => "S>C",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum MessageKind {
    EncryptedRegister = 0x01,
    AuxQubit = 0x02,
    ClassicalX = 0x03,
    ClassicalC = 0x04,
    ReportedMeasurement = 0x05,
    OutputRegister = 0x06,
}

impl MessageKind {
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<MessageKind> {
        Some(match tag {
            0x01 => MessageKind::EncryptedRegister,
            0x02 => MessageKind::AuxQubit,
            0x03 => MessageKind::ClassicalX,
            0x04 => MessageKind::ClassicalC,
            0x05 => MessageKind::ReportedMeasurement,
            0x06 => MessageKind::OutputRegister,
            _ => return None,
        })
    }

    pub fn direction(self) -> Direction {
        match self {
            MessageKind::EncryptedRegister | MessageKind::AuxQubit | MessageKind::ClassicalX => {
                Direction::ClientToServer
            }
            MessageKind::ClassicalC
            | MessageKind::ReportedMeasurement
            | MessageKind::OutputRegister => Direction::ServerToClient,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::EncryptedRegister => "EncryptedRegister",
            MessageKind::AuxQubit => "AuxQubit",
            MessageKind::ClassicalX => "ClassicalX",
            MessageKind::ClassicalC => "ClassicalC",
            MessageKind::ReportedMeasurement => "ReportedMeasurement",
            MessageKind::OutputRegister => "OutputRegister",
        }
    }
}

/// Everything that crosses between client and server. Registers are carried
/// as amplitude vectors, which stands in for a quantum channel.
#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    EncryptedRegister(StateVector),
    AuxQubit(StateVector),
    ClassicalX(bool),
    ClassicalC(bool),
    ReportedMeasurement(bool),
    OutputRegister(StateVector),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PayloadError {
    #[error("payload truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("{extra} trailing byte(s) after payload")]
    Trailing { extra: usize },
    #[error("bit payload must be 0 or 1, found {0:#04x}")]
    BadBit(u8),
    #[error("register amplitudes not normalised")]
    NotNormalized,
    #[error("register of {0} wires is too large")]
    TooLarge(u8),
    #[error("aux qubit payload must hold one wire, found {0}")]
    AuxWidth(usize),
}

/// `[n][2^n × (re f64 LE, im f64 LE)]`.
pub fn serialize_register(state: &StateVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(1 + 16 * state.dim());
    out.push(state.num_wires() as u8);
    for a in state.amplitudes() {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

pub fn deserialize_register(bytes: &[u8]) -> Result<StateVector, PayloadError> {
    let (&n, rest) = bytes
        .split_first()
        .ok_or(PayloadError::Truncated { need: 1, have: 0 })?;
    if n as usize > crate::qcore::MAX_WIRES {
        return Err(PayloadError::TooLarge(n));
    }
    let need = 16usize << n;
    if rest.len() < need {
        return Err(PayloadError::Truncated {
            need: need + 1,
            have: bytes.len(),
        });
    }
    if rest.len() > need {
        return Err(PayloadError::Trailing {
            extra: rest.len() - need,
        });
    }
    let amps: Vec<C64> = rest
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
        return Err(PayloadError::NotNormalized);
    }
    StateVector::new(n as usize, amps).map_err(|_| PayloadError::NotNormalized)
}

fn decode_bit(bytes: &[u8]) -> Result<bool, PayloadError> {
    match bytes {
        [] => Err(PayloadError::Truncated { need: 1, have: 0 }),
        [0] => Ok(false),
        [1] => Ok(true),
        [b] => Err(PayloadError::BadBit(*b)),
        [_, rest @ ..] => Err(PayloadError::Trailing { extra: rest.len() }),
    }
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::EncryptedRegister(_) => MessageKind::EncryptedRegister,
            Message::AuxQubit(_) => MessageKind::AuxQubit,
            Message::ClassicalX(_) => MessageKind::ClassicalX,
            Message::ClassicalC(_) => MessageKind::ClassicalC,
            Message::ReportedMeasurement(_) => MessageKind::ReportedMeasurement,
            Message::OutputRegister(_) => MessageKind::OutputRegister,
        }
    }

    pub fn direction(&self) -> Direction {
        self.kind().direction()
    }

    pub fn payload(&self) -> Vec<u8> {
        match self {
            Message::EncryptedRegister(s) | Message::AuxQubit(s) | Message::OutputRegister(s) => {
                serialize_register(s)
            }
            Message::ClassicalX(b) | Message::ClassicalC(b) | Message::ReportedMeasurement(b) => {
                vec![*b as u8]
            }
        }
    }

    pub fn from_payload(kind: MessageKind, payload: &[u8]) -> Result<Message, PayloadError> {
        Ok(match kind {
            MessageKind::EncryptedRegister => {
                Message::EncryptedRegister(deserialize_register(payload)?)
            }
            MessageKind::OutputRegister => Message::OutputRegister(deserialize_register(payload)?),
            MessageKind::AuxQubit => {
                let s = deserialize_register(payload)?;
                if s.num_wires() != 1 {
                    return Err(PayloadError::AuxWidth(s.num_wires()));
                }
                Message::AuxQubit(s)
            }
            MessageKind::ClassicalX => Message::ClassicalX(decode_bit(payload)?),
            MessageKind::ClassicalC => Message::ClassicalC(decode_bit(payload)?),
            MessageKind::ReportedMeasurement => Message::ReportedMeasurement(decode_bit(payload)?),
        })
    }
}

/// Every message of one run, in the order sent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, message: Message) {
        self.messages.push(message);
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind() == kind).count()
    }

    pub fn kinds(&self) -> Vec<MessageKind> {
        self.messages.iter().map(Message::kind).collect()
    }

    /// One line per message: `<seq> <dir> <kind> <payload-hex>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (seq, m) in self.messages.iter().enumerate() {
            out.push_str(&format!(
                "{seq} {} {} {}\n",
                m.direction(),
                m.kind().name(),
                hex::encode(m.payload())
            ));
        }
        out
    }
}
