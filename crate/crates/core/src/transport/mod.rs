//! Connection plumbing: framed streams over TCP and an in-memory link, a
//! server whose handshake computation is bounded by a worker pool, and
//! per-connection statistics.

mod client;
mod framed;
mod loopback;
mod pool;
mod server;
mod stats;

pub use client::{
    client_handshake, connect, connect_and_handshake, timeout_from_env, ClientOptions,
    ClientSession, DEFAULT_IO_TIMEOUT, TIMEOUT_ENV,
};
pub use framed::{ByteCounters, ByteStream, Framed, Metered};
pub use loopback::{loopback_pair, LinkModel, LoopbackStream};
pub use pool::ComputePool;
pub use server::{
    serve, serve_connection, serve_connection_with_keys, ConnContext, ServerConfig, ServerHandle,
    DRAIN_DEADLINE,
};
pub use stats::{ConnStats, Outcome, ServerStats, Span};

use crate::handshake::{Alert, AlertCode, ConfigError, DecodeError, HandshakeMessage};
use crate::suite::Seed;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("timed out")]
    Timeout,
    #[error("cannot resolve address {0:?}")]
    Address(String),
    #[error("malformed frame: {0}")]
    Decode(#[from] DecodeError),
    #[error("peer sent alert {}: {}", .0.code, .0.detail)]
    AlertReceived(Alert),
    #[error("aborted with alert {}: {}", .0.code, .0.detail)]
    AlertSent(Alert),
    #[error("peer closed the connection mid-handshake")]
    Closed,
    #[error("unexpected {0} message")]
    Unexpected(&'static str),
    #[error("echoed key fingerprint does not match")]
    KeyEchoMismatch,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl TransportError {
    fn unexpected(msg: Option<HandshakeMessage>) -> Self {
        match msg {
            None => TransportError::Closed,
            Some(HandshakeMessage::Alert(a)) => TransportError::AlertReceived(a),
            Some(HandshakeMessage::ClientHello(_)) => TransportError::Unexpected("ClientHello"),
            Some(HandshakeMessage::ServerHello(_)) => TransportError::Unexpected("ServerHello"),
            Some(HandshakeMessage::Finished(_)) => TransportError::Unexpected("Finished"),
            Some(HandshakeMessage::KeyEcho(_)) => TransportError::Unexpected("KeyEcho"),
        }
    }

    /// The alert code if the handshake ended with an alert either way.
    pub fn alert_code(&self) -> Option<AlertCode> {
        match self {
            TransportError::AlertReceived(a) | TransportError::AlertSent(a) => Some(a.code),
            _ => None,
        }
    }
}

/// Outcome of a client/server pair run entirely in memory.
#[derive(Debug)]
pub struct LoopbackRun {
    pub client: Result<ClientSession, (TransportError, ConnStats)>,
    pub server: ConnStats,
    /// Present when the server accepted Finished.
    pub server_keys: Option<crate::handshake::SessionKeys>,
}

/// One handshake over an in-memory link, server on a scoped thread.
pub fn loopback_handshake(
    ctx: &ConnContext,
    config: &crate::handshake::ClientConfig,
    seed: &Seed,
    link: LinkModel,
) -> LoopbackRun {
    let (c, s) = loopback_pair(link);
    std::thread::scope(|scope| {
        let server = scope.spawn(move || serve_connection_with_keys(&mut Framed::new(s), ctx));
        let client = client_handshake(&mut Framed::new(c), config, seed);
        let (server, server_keys) = server.join().expect("server thread panicked");
        LoopbackRun {
            client,
            server,
            server_keys,
        }
    })
}
