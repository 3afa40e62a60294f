//! Frames and their byte encoding.

use std::io::{self, Read, Write};

use qced_core::engine::{Message, MessageKind};
use qced_core::qcore::MAX_WIRES;

use crate::TransportError;

/// Tag carrying the handshake and close frames (and output registers).
pub const CLOSE_TAG: u8 = 0x06;
pub const HANDSHAKE_LEN: usize = 40;
/// Tag byte plus the largest register payload.
pub const MAX_FRAME_LEN: u32 = 2 + 16 * (1 << MAX_WIRES);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub tag: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(tag: u8, payload: Vec<u8>) -> Self {
        Self { tag, payload }
    }

    pub fn close() -> Self {
        Self::new(CLOSE_TAG, Vec::new())
    }

    pub fn is_close(&self) -> bool {
        self.tag == CLOSE_TAG && self.payload.is_empty()
    }

    /// Value of the length prefix.
    pub fn length(&self) -> u32 {
        1 + self.payload.len() as u32
    }

    /// Parses one frame from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Frame, usize), TransportError> {
        let Some(head) = bytes.get(..4) else {
            return Err(TransportError::Truncated {
                need: 4,
                have: bytes.len(),
            });
        };
        let len = u32::from_be_bytes(head.try_into().expect("4 bytes"));
        check_length(len)?;
        let end = 4 + len as usize;
        if bytes.len() < end {
            return Err(TransportError::Truncated {
                need: end,
                have: bytes.len(),
            });
        }
        Ok((Frame::new(bytes[4], bytes[5..end].to_vec()), end))
    }
}

fn check_length(len: u32) -> Result<(), TransportError> {
    if len == 0 || len > MAX_FRAME_LEN {
        return Err(TransportError::BadLength(len));
    }
    Ok(())
}

pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + frame.payload.len());
    out.extend_from_slice(&frame.length().to_be_bytes());
    out.push(frame.tag);
    out.extend_from_slice(&frame.payload);
    out
}

pub fn encode(message: &Message) -> Frame {
    Frame::new(message.kind().tag(), message.payload())
}

pub fn decode(frame: &Frame) -> Result<Message, TransportError> {
    let kind = MessageKind::from_tag(frame.tag).ok_or(TransportError::UnknownTag(frame.tag))?;
    Ok(Message::from_payload(kind, &frame.payload)?)
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> Result<(), TransportError> {
    w.write_all(&encode_frame(frame)).map_err(io_error)?;
    w.flush().map_err(io_error)
}

/// Reads exactly one frame. A clean EOF before the first byte is
/// [`TransportError::PeerClosed`]; EOF inside a frame is a truncation.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Frame, TransportError> {
    let mut head = [0u8; 4];
    let got = read_up_to(r, &mut head)?;
    if got == 0 {
        return Err(TransportError::PeerClosed);
    }
    if got < 4 {
        return Err(TransportError::Truncated { need: 4, have: got });
    }
    let len = u32::from_be_bytes(head);
    check_length(len)?;
    let mut body = vec![0u8; len as usize];
    let got = read_up_to(r, &mut body)?;
    if got < body.len() {
        return Err(TransportError::Truncated {
            need: 4 + body.len(),
            have: 4 + got,
        });
    }
    let tag = body[0];
    body.remove(0);
    Ok(Frame::new(tag, body))
}

fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize, TransportError> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(io_error(e)),
        }
    }
    Ok(filled)
}

pub(crate) fn io_error(e: io::Error) -> TransportError {
    match e.kind() {
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => TransportError::Timeout,
        _ => TransportError::Io(e),
    }
}

/// Session opener: the sender's circuit hash and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Handshake {
    pub circuit_hash: [u8; 32],
    pub seed: u64,
}

impl Handshake {
    pub fn to_frame(&self) -> Frame {
        let mut payload = self.circuit_hash.to_vec();
        payload.extend_from_slice(&self.seed.to_le_bytes());
        Frame::new(CLOSE_TAG, payload)
    }

    pub fn from_frame(frame: &Frame) -> Result<Handshake, TransportError> {
        if frame.tag != CLOSE_TAG || frame.payload.len() != HANDSHAKE_LEN {
            return Err(TransportError::Unexpected(format!(
                "expected handshake, got tag 0x{:02x} with {} byte(s)",
                frame.tag,
                frame.payload.len()
            )));
        }
        let (hash, seed) = frame.payload.split_at(32);
        Ok(Handshake {
            circuit_hash: hash.try_into().expect("32 bytes"),
            seed: u64::from_le_bytes(seed.try_into().expect("8 bytes")),
        })
    }
}
