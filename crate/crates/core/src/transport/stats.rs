use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use super::framed::ByteCounters;
use crate::handshake::{AlertCode, PhaseTimes};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// This side detected the failure and sent the alert.
    AlertSent(AlertCode),
    AlertReceived(AlertCode),
    /// Turned away at the connection cap.
    Rejected,
    /// Transport error, timeout or unexpected end of stream.
    Failed(String),
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }
}

/// A server-side computation interval, in ns since the server started.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start_ns: u64,
    pub end_ns: u64,
}

#[derive(Clone, Debug)]
pub struct ConnStats {
    pub outcome: Outcome,
    pub latency_ns: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub phases: PhaseTimes,
    pub compute_spans: Vec<Span>,
}

impl ConnStats {
    pub(crate) fn new(outcome: Outcome) -> Self {
        Self {
            outcome,
            latency_ns: 0,
            bytes_sent: 0,
            bytes_received: 0,
            phases: PhaseTimes::default(),
            compute_spans: Vec::new(),
        }
    }
}

/// Aggregated server-side statistics. Append-only; safe to read while the
/// server runs.
#[derive(Debug)]
pub struct ServerStats {
    epoch: Instant,
    pub(crate) counters: Arc<ByteCounters>,
    connections: Mutex<Vec<ConnStats>>,
    successes: AtomicU64,
    failures: AtomicU64,
    rejected: AtomicU64,
}

impl ServerStats {
    pub(crate) fn new() -> Self {
        Self {
            epoch: Instant::now(),
            counters: Arc::default(),
            connections: Mutex::default(),
            successes: AtomicU64::new(0),
            failures: AtomicU64::new(0),
            rejected: AtomicU64::new(0),
        }
    }

    pub(crate) fn epoch(&self) -> Instant {
        self.epoch
    }

    pub(crate) fn record(&self, stats: ConnStats) {
        let counter = match stats.outcome {
            Outcome::Success => &self.successes,
            Outcome::Rejected => &self.rejected,
            _ => &self.failures,
        };
        counter.fetch_add(1, Ordering::Relaxed);
        self.connections.lock().unwrap().push(stats);
    }

    pub fn successes(&self) -> u64 {
        self.successes.load(Ordering::Relaxed)
    }

    pub fn failures(&self) -> u64 {
        self.failures.load(Ordering::Relaxed)
    }

    pub fn rejected(&self) -> u64 {
        self.rejected.load(Ordering::Relaxed)
    }

    pub fn connections(&self) -> Vec<ConnStats> {
        self.connections.lock().unwrap().clone()
    }

    /// Raw bytes written on all server sockets.
    pub fn bytes_sent(&self) -> u64 {
        self.counters.sent()
    }

    pub fn bytes_received(&self) -> u64 {
        self.counters.received()
    }
}
