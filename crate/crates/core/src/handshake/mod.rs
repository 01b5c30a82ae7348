//! The handshake: wire messages and codec, transcript hashing,
//! server-side encapsulate-and-sign, client-side verify-and-decapsulate,
//! key schedule, Finished confirmation, and a depth-one certificate chain.

mod cert;
mod codec;
mod flow;
mod keys;
mod messages;

pub use cert::{cert_issue, cert_verify, TrustAnchor, TrustStore};
pub use codec::{
    decode_message, decode_payload, encode_frame, encode_message, parse_frame_header, DecodeError,
    MessageType, FRAME_HEADER_LEN, MAX_PAYLOAD_LEN,
};
pub use flow::{
    client_begin, client_process_server_hello, server_process_finished, server_respond,
    server_respond_with_faults, ClientConfig, ClientFinish, ClientPending, ConfigError, Credential,
    FaultInjection, PhaseTimes, ServerIdentity, ServerPending, DEFAULT_SUBJECT,
};
pub use keys::{finished_mac, key_schedule, SessionKeys};
pub use messages::{
    Alert, AlertCode, Certificate, ClientHello, Finished, HandshakeMessage, ServerHello,
    MAX_SIG_ALGS, MAX_SUBJECT_LEN, PROTOCOL_VERSION,
};
