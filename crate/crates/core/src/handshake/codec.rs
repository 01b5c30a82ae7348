//! Bit-exact framing: `type:u8 ‖ length:u32 ‖ payload`, big-endian.

use super::messages::*;

/// Upper bound on a frame payload accepted from the wire.
pub const MAX_PAYLOAD_LEN: usize = 1 << 20;
pub const FRAME_HEADER_LEN: usize = 5;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("truncated input")]
    Truncated,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("unknown message type {0}")]
    UnknownType(u8),
    #[error("payload of {0} bytes exceeds the frame limit")]
    TooLarge(usize),
    #[error("invalid field: {0}")]
    Invalid(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageType {
    ClientHello = 1,
    ServerHello = 2,
    Finished = 3,
    Alert = 4,
    /// Test-only: server echoes a hash of its session keys after accepting
    /// Finished.
    KeyEcho = 5,
}

impl TryFrom<u8> for MessageType {
    type Error = DecodeError;

    fn try_from(v: u8) -> Result<Self, DecodeError> {
        Ok(match v {
            1 => Self::ClientHello,
            2 => Self::ServerHello,
            3 => Self::Finished,
            4 => Self::Alert,
            5 => Self::KeyEcho,
            other => return Err(DecodeError::UnknownType(other)),
        })
    }
}

/// Validates a frame header and returns the message type and payload length.
pub fn parse_frame_header(
    header: &[u8; FRAME_HEADER_LEN],
) -> Result<(MessageType, usize), DecodeError> {
    let ty = MessageType::try_from(header[0])?;
    let len = u32::from_be_bytes(header[1..].try_into().unwrap()) as usize;
    if len > MAX_PAYLOAD_LEN {
        return Err(DecodeError::TooLarge(len));
    }
    Ok((ty, len))
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() < n {
            return Err(DecodeError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub(crate) fn array<const L: usize>(&mut self) -> Result<[u8; L], DecodeError> {
        Ok(self.bytes(L)?.try_into().unwrap())
    }

    pub(crate) fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.array::<1>()?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.array()?))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    /// `len:u32 ‖ bytes`
    pub(crate) fn vec32(&mut self) -> Result<Vec<u8>, DecodeError> {
        let n = self.u32()? as usize;
        Ok(self.bytes(n)?.to_vec())
    }

    pub(crate) fn finish(self) -> Result<(), DecodeError> {
        match self.buf.len() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

pub(crate) fn put_vec32(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

pub fn encode_frame(ty: MessageType, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + payload.len());
    out.push(ty as u8);
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(payload);
    out
}

pub fn encode_message(msg: &HandshakeMessage) -> Vec<u8> {
    let (ty, payload) = match msg {
        HandshakeMessage::ClientHello(m) => (MessageType::ClientHello, m.encode_payload()),
        HandshakeMessage::ServerHello(m) => (MessageType::ServerHello, m.encode_payload()),
        HandshakeMessage::Finished(m) => (MessageType::Finished, m.mac.to_vec()),
        HandshakeMessage::Alert(m) => (MessageType::Alert, m.encode_payload()),
        HandshakeMessage::KeyEcho(m) => (MessageType::KeyEcho, m.to_vec()),
    };
    encode_frame(ty, &payload)
}

/// Decodes exactly one frame. Never panics on arbitrary input.
pub fn decode_message(bytes: &[u8]) -> Result<HandshakeMessage, DecodeError> {
    let header: [u8; FRAME_HEADER_LEN] = bytes
        .get(..FRAME_HEADER_LEN)
        .ok_or(DecodeError::Truncated)?
        .try_into()
        .unwrap();
    let (ty, len) = parse_frame_header(&header)?;
    let payload = &bytes[FRAME_HEADER_LEN..];
    if payload.len() < len {
        return Err(DecodeError::Truncated);
    }
    if payload.len() > len {
        return Err(DecodeError::TrailingBytes(payload.len() - len));
    }
    decode_payload(ty, payload)
}

pub fn decode_payload(ty: MessageType, payload: &[u8]) -> Result<HandshakeMessage, DecodeError> {
    Ok(match ty {
        MessageType::ClientHello => {
            HandshakeMessage::ClientHello(ClientHello::decode_payload(payload)?)
        }
        MessageType::ServerHello => {
            HandshakeMessage::ServerHello(ServerHello::decode_payload(payload)?)
        }
        MessageType::Finished => {
            let mut r = Reader::new(payload);
            let mac = r.array()?;
            r.finish()?;
            HandshakeMessage::Finished(Finished { mac })
        }
        MessageType::Alert => HandshakeMessage::Alert(Alert::decode_payload(payload)?),
        MessageType::KeyEcho => {
            let mut r = Reader::new(payload);
            let hash = r.array()?;
            r.finish()?;
            HandshakeMessage::KeyEcho(hash)
        }
    })
}
