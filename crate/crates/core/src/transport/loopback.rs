use std::collections::VecDeque;
use std::io::{self, Read, Write};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::framed::ByteStream;

/// Delay injected on each direction of an in-memory link.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinkModel {
    pub latency: Duration,
    /// Bytes per second; `None` is unlimited.
    pub bandwidth: Option<f64>,
}

struct Chunk {
    deliver_at: Instant,
    bytes: Vec<u8>,
}

/// One end of an in-memory byte pipe.
pub struct LoopbackStream {
    tx: Option<Sender<Chunk>>,
    rx: Receiver<Chunk>,
    pending: VecDeque<u8>,
    model: LinkModel,
    // When the outgoing direction finishes serializing its last write.
    link_free: Arc<Mutex<Instant>>,
    read_timeout: Option<Duration>,
}

impl LoopbackStream {
    pub fn set_read_timeout(&mut self, timeout: Option<Duration>) {
        self.read_timeout = timeout;
    }
}

/// Two connected endpoints. Delivery is ordered and lossless.
pub fn loopback_pair(model: LinkModel) -> (LoopbackStream, LoopbackStream) {
    let (atx, brx) = channel();
    let (btx, arx) = channel();
    let now = Instant::now();
    let end = |tx, rx| LoopbackStream {
        tx: Some(tx),
        rx,
        pending: VecDeque::new(),
        model,
        link_free: Arc::new(Mutex::new(now)),
        read_timeout: None,
    };
    (end(atx, arx), end(btx, brx))
}

impl Write for LoopbackStream {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let tx = self
            .tx
            .as_ref()
            .ok_or_else(|| io::Error::new(io::ErrorKind::BrokenPipe, "write half closed"))?;
        let now = Instant::now();
        let serialized = {
            let mut free = self.link_free.lock().unwrap();
            let start = (*free).max(now);
            let tx_time = match self.model.bandwidth {
                Some(bw) => Duration::from_secs_f64(buf.len() as f64 / bw),
                None => Duration::ZERO,
            };
            *free = start + tx_time;
            *free
        };
        let chunk = Chunk {
            deliver_at: serialized + self.model.latency,
            bytes: buf.to_vec(),
        };
        tx.send(chunk)
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer dropped"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl Read for LoopbackStream {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if buf.is_empty() {
            return Ok(0);
        }
        if self.pending.is_empty() {
            let chunk = match self.read_timeout {
                Some(t) => match self.rx.recv_timeout(t) {
                    Ok(c) => c,
                    Err(RecvTimeoutError::Timeout) => return Err(io::ErrorKind::TimedOut.into()),
                    Err(RecvTimeoutError::Disconnected) => return Ok(0),
                },
                None => match self.rx.recv() {
                    Ok(c) => c,
                    Err(_) => return Ok(0),
                },
            };
            let wait = chunk.deliver_at.saturating_duration_since(Instant::now());
            if !wait.is_zero() {
                std::thread::sleep(wait);
            }
            self.pending.extend(chunk.bytes);
        }
        let n = buf.len().min(self.pending.len());
        for (dst, src) in buf.iter_mut().zip(self.pending.drain(..n)) {
            *dst = src;
        }
        Ok(n)
    }
}

impl ByteStream for LoopbackStream {
    fn shutdown_write(&mut self) -> io::Result<()> {
        self.tx = None;
        Ok(())
    }
}
