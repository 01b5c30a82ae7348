use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::framed::{ByteStream, Framed, Metered};
use super::pool::ComputePool;
use super::stats::{ConnStats, Outcome, ServerStats, Span};
use super::{TransportError, DEFAULT_IO_TIMEOUT};
use crate::handshake::{
    server_process_finished, server_respond_with_faults, Alert, AlertCode, FaultInjection,
    HandshakeMessage, ServerIdentity, SessionKeys,
};
use crate::par::Exec;

pub const DRAIN_DEADLINE: Duration = Duration::from_secs(5);

#[derive(Clone)]
pub struct ServerConfig {
    pub listen: String,
    pub identity: Arc<ServerIdentity>,
    /// Handshakes computed in parallel, at least 1.
    pub workers: usize,
    pub max_connections: usize,
    /// Send a KeyEcho frame after accepting Finished. Test-only.
    pub echo_key_hash: bool,
    pub io_timeout: Duration,
    pub exec: Exec,
    pub faults: FaultInjection,
}

impl ServerConfig {
    pub fn new(listen: impl Into<String>, identity: Arc<ServerIdentity>) -> Self {
        Self {
            listen: listen.into(),
            identity,
            workers: 1,
            max_connections: 1024,
            echo_key_hash: false,
            io_timeout: DEFAULT_IO_TIMEOUT,
            exec: Exec::default(),
            faults: FaultInjection::default(),
        }
    }
}

/// Everything a connection handler needs from its server.
pub struct ConnContext {
    pub identity: Arc<ServerIdentity>,
    pub pool: ComputePool,
    pub echo_key_hash: bool,
    pub faults: FaultInjection,
    epoch: Instant,
}

impl ConnContext {
    pub fn new(identity: Arc<ServerIdentity>, workers: usize, exec: Exec) -> Self {
        Self {
            identity,
            pool: ComputePool::new(workers, exec),
            echo_key_hash: false,
            faults: FaultInjection::default(),
            epoch: Instant::now(),
        }
    }

    fn timed<R: Send>(&self, spans: &mut Vec<Span>, f: impl FnOnce() -> R + Send) -> R {
        let epoch = self.epoch;
        let (r, span) = self.pool.run(|| {
            let start = epoch.elapsed().as_nanos() as u64;
            let r = f();
            (
                r,
                Span {
                    start_ns: start,
                    end_ns: epoch.elapsed().as_nanos() as u64,
                },
            )
        });
        spans.push(span);
        r
    }
}

fn alert_outcome<S: ByteStream>(framed: &mut Framed<S>, alert: Alert) -> Outcome {
    let code = alert.code;
    let _ = framed.send(&HandshakeMessage::Alert(alert));
    let _ = framed.close_write();
    Outcome::AlertSent(code)
}

fn error_outcome<S: ByteStream>(framed: &mut Framed<S>, err: TransportError) -> Outcome {
    match err {
        TransportError::Decode(e) => alert_outcome(framed, Alert::from(e)),
        other => Outcome::Failed(other.to_string()),
    }
}

fn unexpected<S: ByteStream>(framed: &mut Framed<S>, msg: Option<HandshakeMessage>) -> Outcome {
    match msg {
        None => Outcome::Failed("peer closed mid-handshake".into()),
        Some(HandshakeMessage::Alert(a)) => Outcome::AlertReceived(a.code),
        Some(_) => alert_outcome(
            framed,
            Alert::new(AlertCode::DecodeError, "unexpected message"),
        ),
    }
}

/// Runs the server side of one handshake on an established stream. Never
/// panics on peer input; every failure ends up in the returned stats.
pub fn serve_connection<S: ByteStream>(framed: &mut Framed<S>, ctx: &ConnContext) -> ConnStats {
    serve_connection_with_keys(framed, ctx).0
}

/// As [`serve_connection`], also returning the session keys of an accepted
/// handshake. For in-process tests.
pub fn serve_connection_with_keys<S: ByteStream>(
    framed: &mut Framed<S>,
    ctx: &ConnContext,
) -> (ConnStats, Option<SessionKeys>) {
    let start = Instant::now();
    let mut keys = None;
    let mut spans = Vec::new();
    let mut phases = Default::default();
    let outcome = (|| {
        let ch = match framed.recv() {
            Ok(Some(HandshakeMessage::ClientHello(ch))) => ch,
            Ok(other) => return unexpected(framed, other),
            Err(e) => return error_outcome(framed, e),
        };
        let seed: [u8; 32] = rand::random();
        let (sh, pending) = match ctx.timed(&mut spans, || {
            server_respond_with_faults(&ctx.identity, &ch, &seed, ctx.faults)
        }) {
            Ok(r) => r,
            Err(alert) => return alert_outcome(framed, alert),
        };
        phases = pending.times;
        if let Err(e) = framed.send(&HandshakeMessage::ServerHello(sh)) {
            return Outcome::Failed(e.to_string());
        }
        let fin = match framed.recv() {
            Ok(Some(HandshakeMessage::Finished(f))) => f,
            Ok(other) => return unexpected(framed, other),
            Err(e) => return error_outcome(framed, e),
        };
        if let Err(alert) = ctx.timed(&mut spans, || server_process_finished(&pending, &fin)) {
            return alert_outcome(framed, alert);
        }
        keys = Some(pending.keys);
        if ctx.echo_key_hash {
            if let Err(e) = framed.send(&HandshakeMessage::KeyEcho(pending.keys.fingerprint())) {
                return Outcome::Failed(e.to_string());
            }
        }
        match framed.close_write() {
            Ok(()) => Outcome::Success,
            Err(e) => Outcome::Failed(e.to_string()),
        }
    })();
    let stats = ConnStats {
        outcome,
        latency_ns: start.elapsed().as_nanos() as u64,
        bytes_sent: framed.bytes_sent(),
        bytes_received: framed.bytes_received(),
        phases,
        compute_spans: spans,
    };
    (stats, keys)
}

/// A running server. Dropping it without [`ServerHandle::stop`] leaves the
/// acceptor running until process exit.
pub struct ServerHandle {
    local_addr: SocketAddr,
    stats: Arc<ServerStats>,
    stopping: Arc<AtomicBool>,
    active: Arc<AtomicUsize>,
    acceptor: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn stats(&self) -> &Arc<ServerStats> {
        &self.stats
    }

    pub fn active_connections(&self) -> usize {
        self.active.load(Ordering::SeqCst)
    }

    /// Stops accepting, then waits up to [`DRAIN_DEADLINE`] for in-flight
    /// handshakes. Returns true if everything drained.
    pub fn stop(mut self) -> bool {
        self.stopping.store(true, Ordering::SeqCst);
        let mut wake = self.local_addr;
        if wake.ip().is_unspecified() {
            wake.set_ip(if wake.is_ipv4() {
                [127, 0, 0, 1].into()
            } else {
                std::net::Ipv6Addr::LOCALHOST.into()
            });
        }
        let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
        let deadline = Instant::now() + DRAIN_DEADLINE;
        while self.active.load(Ordering::SeqCst) > 0 {
            if Instant::now() >= deadline {
                return false;
            }
            std::thread::sleep(Duration::from_millis(2));
        }
        true
    }
}

struct ActiveGuard(Arc<AtomicUsize>);

impl Drop for ActiveGuard {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

pub fn serve(config: ServerConfig) -> Result<ServerHandle, TransportError> {
    let addr = config
        .listen
        .to_socket_addrs()
        .map_err(TransportError::Io)?
        .next()
        .ok_or_else(|| TransportError::Address(config.listen.clone()))?;
    let listener = TcpListener::bind(addr).map_err(TransportError::Io)?;
    let local_addr = listener.local_addr().map_err(TransportError::Io)?;
    let stats = Arc::new(ServerStats::new());
    let stopping = Arc::new(AtomicBool::new(false));
    let active = Arc::new(AtomicUsize::new(0));
    let mut ctx = ConnContext::new(config.identity.clone(), config.workers, config.exec);
    ctx.echo_key_hash = config.echo_key_hash;
    ctx.faults = config.faults;
    ctx.epoch = stats.epoch();
    let ctx = Arc::new(ctx);

    let acceptor = {
        let (stats, stopping, active) = (stats.clone(), stopping.clone(), active.clone());
        let (cap, timeout) = (config.max_connections.max(1), config.io_timeout);
        std::thread::Builder::new()
            .name("pqtls-acceptor".into())
            .spawn(move || {
                for conn in listener.incoming() {
                    if stopping.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = conn else { continue };
                    let _ = stream.set_nodelay(true);
                    let _ = stream.set_read_timeout(Some(timeout));
                    let _ = stream.set_write_timeout(Some(timeout));
                    let mut framed = Framed::new(Metered::new(stream, stats.counters.clone()));
                    if active.fetch_add(1, Ordering::SeqCst) >= cap {
                        active.fetch_sub(1, Ordering::SeqCst);
                        let _ = framed.send(&HandshakeMessage::Alert(Alert::new(
                            AlertCode::DecodeError,
                            "server at connection capacity",
                        )));
                        let _ = framed.close_write();
                        let mut s = ConnStats::new(Outcome::Rejected);
                        s.bytes_sent = framed.bytes_sent();
                        stats.record(s);
                        continue;
                    }
                    let guard = ActiveGuard(active.clone());
                    let (conn_stats, ctx) = (stats.clone(), ctx.clone());
                    let spawned =
                        std::thread::Builder::new()
                            .name("pqtls-conn".into())
                            .spawn(move || {
                                let _guard = guard;
                                let s = serve_connection(&mut framed, &ctx);
                                conn_stats.record(s);
                            });
                    if spawned.is_err() {
                        stats.record(ConnStats::new(Outcome::Failed(
                            "could not spawn handler".into(),
                        )));
                    }
                }
            })
            .map_err(TransportError::Io)?
    };

    Ok(ServerHandle {
        local_addr,
        stats,
        stopping,
        active,
        acceptor: Some(acceptor),
    })
}
