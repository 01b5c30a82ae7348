use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use super::framed::{ByteStream, Framed};
use super::stats::{ConnStats, Outcome};
use super::TransportError;
use crate::handshake::{
    client_begin, client_process_server_hello, ClientConfig, HandshakeMessage, PhaseTimes,
    SessionKeys,
};
use crate::suite::Seed;

pub const DEFAULT_IO_TIMEOUT: Duration = Duration::from_secs(10);
pub const TIMEOUT_ENV: &str = "PQTLS_TIMEOUT_MS";

/// [`DEFAULT_IO_TIMEOUT`] unless `PQTLS_TIMEOUT_MS` holds a positive integer.
pub fn timeout_from_env() -> Duration {
    std::env::var(TIMEOUT_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .filter(|ms| *ms > 0)
        .map(Duration::from_millis)
        .unwrap_or(DEFAULT_IO_TIMEOUT)
}

#[derive(Clone, Debug)]
pub struct ClientOptions {
    pub timeout: Duration,
    /// Fixed session seed; random when `None`.
    pub seed: Option<Seed>,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self {
            timeout: timeout_from_env(),
            seed: None,
        }
    }
}

/// Result of a client handshake that reached a verdict.
#[derive(Clone, Debug)]
pub struct ClientSession {
    pub keys: SessionKeys,
    /// Present when the server echoed a key fingerprint; already checked.
    pub echoed_fingerprint: Option<[u8; 32]>,
    pub stats: ConnStats,
}

/// Runs the client side on an established stream. The handshake counts as
/// accepted once the server closes cleanly after Finished.
#[allow(clippy::result_large_err)]
pub fn client_handshake<S: ByteStream>(
    framed: &mut Framed<S>,
    config: &ClientConfig,
    seed: &Seed,
) -> Result<ClientSession, (TransportError, ConnStats)> {
    let start = Instant::now();
    let mut phases = PhaseTimes::default();
    let result = (|| {
        let (ch, mut pending) = client_begin(config, seed)?;
        phases = pending.times();
        framed.send(&HandshakeMessage::ClientHello(ch))?;
        let sh = match framed.recv()? {
            Some(HandshakeMessage::ServerHello(sh)) => sh,
            other => return Err(TransportError::unexpected(other)),
        };
        let fin = match client_process_server_hello(&mut pending, &sh) {
            Ok(fin) => fin,
            Err(alert) => {
                phases = pending.times();
                let _ = framed.send(&HandshakeMessage::Alert(alert.clone()));
                let _ = framed.close_write();
                return Err(TransportError::AlertSent(alert));
            }
        };
        phases = fin.times;
        framed.send(&HandshakeMessage::Finished(fin.finished))?;
        let mut echoed = None;
        loop {
            match framed.recv()? {
                None => break,
                Some(HandshakeMessage::KeyEcho(h)) if echoed.is_none() => {
                    if h != fin.keys.fingerprint() {
                        return Err(TransportError::KeyEchoMismatch);
                    }
                    echoed = Some(h);
                }
                other => return Err(TransportError::unexpected(other)),
            }
        }
        let _ = framed.close_write();
        Ok((fin.keys, echoed))
    })();
    let outcome = match &result {
        Ok(_) => Outcome::Success,
        Err(TransportError::AlertSent(a)) => Outcome::AlertSent(a.code),
        Err(TransportError::AlertReceived(a)) => Outcome::AlertReceived(a.code),
        Err(e) => Outcome::Failed(e.to_string()),
    };
    let stats = ConnStats {
        outcome,
        latency_ns: start.elapsed().as_nanos() as u64,
        bytes_sent: framed.bytes_sent(),
        bytes_received: framed.bytes_received(),
        phases,
        compute_spans: Vec::new(),
    };
    match result {
        Ok((keys, echoed_fingerprint)) => Ok(ClientSession {
            keys,
            echoed_fingerprint,
            stats,
        }),
        Err(e) => Err((e, stats)),
    }
}

pub fn connect(addr: &str, timeout: Duration) -> Result<TcpStream, TransportError> {
    let mut last = None;
    for a in addr.to_socket_addrs().map_err(TransportError::Io)? {
        match TcpStream::connect_timeout(&a, timeout) {
            Ok(s) => {
                s.set_nodelay(true).map_err(TransportError::Io)?;
                s.set_read_timeout(Some(timeout))
                    .map_err(TransportError::Io)?;
                s.set_write_timeout(Some(timeout))
                    .map_err(TransportError::Io)?;
                return Ok(s);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.map_or_else(
        || TransportError::Address(addr.to_string()),
        TransportError::Io,
    ))
}

/// Connects over TCP and performs one handshake. Latency includes connect.
pub fn connect_and_handshake(
    config: &ClientConfig,
    addr: &str,
    opts: &ClientOptions,
) -> Result<ClientSession, TransportError> {
    let start = Instant::now();
    let stream = connect(addr, opts.timeout)?;
    let seed = opts.seed.unwrap_or_else(rand::random);
    let mut framed = Framed::new(stream);
    let mut session = client_handshake(&mut framed, config, &seed).map_err(|(e, _)| e)?;
    session.stats.latency_ns = start.elapsed().as_nanos() as u64;
    Ok(session)
}
