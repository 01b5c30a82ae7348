use super::codec::{put_vec32, DecodeError, Reader};

pub const PROTOCOL_VERSION: u16 = 0x0001;
pub const MAX_SIG_ALGS: usize = 8;
pub const MAX_SUBJECT_LEN: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HandshakeMessage {
    ClientHello(ClientHello),
    ServerHello(ServerHello),
    Finished(Finished),
    Alert(Alert),
    KeyEcho([u8; 32]),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClientHello {
    pub version: u16,
    pub client_random: [u8; 32],
    pub kem_alg: u16,
    pub sig_algs: Vec<u16>,
    pub kem_public_key: Vec<u8>,
}

impl ClientHello {
    pub fn encode_payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(41 + 2 * self.sig_algs.len() + self.kem_public_key.len());
        out.extend_from_slice(&self.version.to_be_bytes());
        out.extend_from_slice(&self.client_random);
        out.extend_from_slice(&self.kem_alg.to_be_bytes());
        out.push(self.sig_algs.len() as u8);
        for s in &self.sig_algs {
            out.extend_from_slice(&s.to_be_bytes());
        }
        put_vec32(&mut out, &self.kem_public_key);
        out
    }

    pub fn decode_payload(payload: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(payload);
        let version = r.u16()?;
        if version != PROTOCOL_VERSION {
            return Err(DecodeError::Invalid("protocol version"));
        }
        let client_random = r.array()?;
        let kem_alg = r.u16()?;
        let count = r.u8()? as usize;
        if count == 0 || count > MAX_SIG_ALGS {
            return Err(DecodeError::Invalid("signature algorithm count"));
        }
        let sig_algs = (0..count).map(|_| r.u16()).collect::<Result<Vec<_>, _>>()?;
        if (1..count).any(|i| sig_algs[..i].contains(&sig_algs[i])) {
            return Err(DecodeError::Invalid("duplicate signature algorithm"));
        }
        let kem_public_key = r.vec32()?;
        r.finish()?;
        Ok(Self {
            version,
            client_random,
            kem_alg,
            sig_algs,
            kem_public_key,
        })
    }
}

/// The certificate travels as an opaque blob so that a malformed
/// certificate is reported as a certificate failure, not a framing one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerHello {
    pub version: u16,
    pub server_random: [u8; 32],
    pub chosen_kem: u16,
    pub chosen_sig: u16,
    pub certificate: Vec<u8>,
    pub kem_ciphertext: Vec<u8>,
    pub signature: Vec<u8>,
}

impl ServerHello {
    /// Payload up to and including the KEM ciphertext: the part covered by
    /// the server's signature.
    pub fn encode_signed_prefix(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(50 + self.certificate.len() + self.kem_ciphertext.len());
        out.extend_from_slice(&self.version.to_be_bytes());
        out.extend_from_slice(&self.server_random);
        out.extend_from_slice(&self.chosen_kem.to_be_bytes());
        out.extend_from_slice(&self.chosen_sig.to_be_bytes());
        put_vec32(&mut out, &self.certificate);
        put_vec32(&mut out, &self.kem_ciphertext);
        out
    }

    pub fn encode_payload(&self) -> Vec<u8> {
        let mut out = self.encode_signed_prefix();
        put_vec32(&mut out, &self.signature);
        out
    }

    pub fn decode_payload(payload: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(payload);
        let version = r.u16()?;
        if version != PROTOCOL_VERSION {
            return Err(DecodeError::Invalid("protocol version"));
        }
        let hello = Self {
            version,
            server_random: r.array()?,
            chosen_kem: r.u16()?,
            chosen_sig: r.u16()?,
            certificate: r.vec32()?,
            kem_ciphertext: r.vec32()?,
            signature: r.vec32()?,
        };
        r.finish()?;
        Ok(hello)
    }

    pub fn parse_certificate(&self) -> Result<Certificate, DecodeError> {
        Certificate::decode(&self.certificate)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub subject: String,
    pub sig_alg: u16,
    pub subject_pk: Vec<u8>,
    pub issuer_sig: Vec<u8>,
}

impl Certificate {
    /// subject ‖ sig_alg ‖ subject_pk: the bytes the issuer signs.
    pub fn to_be_signed(subject: &str, sig_alg: u16, subject_pk: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(subject.len() + 2 + subject_pk.len());
        out.extend_from_slice(subject.as_bytes());
        out.extend_from_slice(&sig_alg.to_be_bytes());
        out.extend_from_slice(subject_pk);
        out
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            12 + self.subject.len() + self.subject_pk.len() + self.issuer_sig.len(),
        );
        out.extend_from_slice(&(self.subject.len() as u16).to_be_bytes());
        out.extend_from_slice(self.subject.as_bytes());
        out.extend_from_slice(&self.sig_alg.to_be_bytes());
        put_vec32(&mut out, &self.subject_pk);
        put_vec32(&mut out, &self.issuer_sig);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let subject_len = r.u16()? as usize;
        if subject_len > MAX_SUBJECT_LEN {
            return Err(DecodeError::Invalid("certificate subject length"));
        }
        let subject = std::str::from_utf8(r.bytes(subject_len)?)
            .map_err(|_| DecodeError::Invalid("certificate subject is not UTF-8"))?
            .to_string();
        let cert = Self {
            subject,
            sig_alg: r.u16()?,
            subject_pk: r.vec32()?,
            issuer_sig: r.vec32()?,
        };
        r.finish()?;
        Ok(cert)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Finished {
    pub mac: [u8; 32],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum AlertCode {
    DecodeError = 1,
    BadSignature = 2,
    BadCertificate = 3,
    UnsupportedAlgorithm = 4,
    BadFinished = 5,
}

impl TryFrom<u16> for AlertCode {
    type Error = DecodeError;

    fn try_from(v: u16) -> Result<Self, DecodeError> {
        Ok(match v {
            1 => Self::DecodeError,
            2 => Self::BadSignature,
            3 => Self::BadCertificate,
            4 => Self::UnsupportedAlgorithm,
            5 => Self::BadFinished,
            _ => return Err(DecodeError::Invalid("alert code")),
        })
    }
}

impl AlertCode {
    pub fn name(self) -> &'static str {
        match self {
            Self::DecodeError => "decode_error",
            Self::BadSignature => "bad_signature",
            Self::BadCertificate => "bad_certificate",
            Self::UnsupportedAlgorithm => "unsupported_algorithm",
            Self::BadFinished => "bad_finished",
        }
    }
}

impl std::fmt::Display for AlertCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fatal alert; the sender closes the connection after sending it.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {detail}")]
pub struct Alert {
    pub code: AlertCode,
    pub detail: String,
}

impl Alert {
    pub fn new(code: AlertCode, detail: impl Into<String>) -> Self {
        let mut detail: String = detail.into();
        if detail.len() > 255 {
            let mut cut = 255;
            while !detail.is_char_boundary(cut) {
                cut -= 1;
            }
            detail.truncate(cut);
        }
        Self { code, detail }
    }

    pub fn encode_payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 + self.detail.len());
        out.extend_from_slice(&(self.code as u16).to_be_bytes());
        out.push(self.detail.len() as u8);
        out.extend_from_slice(self.detail.as_bytes());
        out
    }

    pub fn decode_payload(payload: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(payload);
        let code = AlertCode::try_from(r.u16()?)?;
        let n = r.u8()? as usize;
        let detail = std::str::from_utf8(r.bytes(n)?)
            .map_err(|_| DecodeError::Invalid("alert detail is not UTF-8"))?
            .to_string();
        r.finish()?;
        Ok(Self { code, detail })
    }
}

impl From<DecodeError> for Alert {
    fn from(e: DecodeError) -> Self {
        Alert::new(AlertCode::DecodeError, e.to_string())
    }
}
