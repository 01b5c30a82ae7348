use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::TransportError;
use crate::handshake::{
    decode_payload, encode_frame, encode_message, parse_frame_header, DecodeError,
    HandshakeMessage, MessageType, FRAME_HEADER_LEN,
};

/// A reliable ordered byte stream that can half-close.
pub trait ByteStream: Read + Write + Send {
    fn shutdown_write(&mut self) -> io::Result<()>;
}

impl ByteStream for TcpStream {
    fn shutdown_write(&mut self) -> io::Result<()> {
        match self.shutdown(Shutdown::Write) {
            Err(e) if e.kind() == io::ErrorKind::NotConnected => Ok(()),
            r => r,
        }
    }
}

/// Shared byte counters at the raw stream level.
#[derive(Debug, Default)]
pub struct ByteCounters {
    pub sent: AtomicU64,
    pub received: AtomicU64,
}

impl ByteCounters {
    pub fn sent(&self) -> u64 {
        self.sent.load(Ordering::Relaxed)
    }

    pub fn received(&self) -> u64 {
        self.received.load(Ordering::Relaxed)
    }
}

/// Counts every byte read or written into a shared [`ByteCounters`].
pub struct Metered<S> {
    inner: S,
    counters: Arc<ByteCounters>,
}

impl<S> Metered<S> {
    pub fn new(inner: S, counters: Arc<ByteCounters>) -> Self {
        Self { inner, counters }
    }

    pub fn get_ref(&self) -> &S {
        &self.inner
    }
}

impl<S: Read> Read for Metered<S> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.counters
            .received
            .fetch_add(n as u64, Ordering::Relaxed);
        Ok(n)
    }
}

impl<S: Write> Write for Metered<S> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.counters.sent.fetch_add(n as u64, Ordering::Relaxed);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

impl<S: ByteStream> ByteStream for Metered<S> {
    fn shutdown_write(&mut self) -> io::Result<()> {
        self.inner.shutdown_write()
    }
}

fn map_io(e: io::Error) -> TransportError {
    match e.kind() {
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => TransportError::Timeout,
        _ => TransportError::Io(e),
    }
}

/// Handshake frames over a byte stream, with per-connection byte counts.
pub struct Framed<S> {
    stream: S,
    bytes_sent: u64,
    bytes_received: u64,
}

impl<S: ByteStream> Framed<S> {
    pub fn new(stream: S) -> Self {
        Self {
            stream,
            bytes_sent: 0,
            bytes_received: 0,
        }
    }

    pub fn get_ref(&self) -> &S {
        &self.stream
    }

    pub fn bytes_sent(&self) -> u64 {
        self.bytes_sent
    }

    pub fn bytes_received(&self) -> u64 {
        self.bytes_received
    }

    /// Returns the number of bytes written.
    pub fn send(&mut self, msg: &HandshakeMessage) -> Result<usize, TransportError> {
        self.send_raw(&encode_message(msg))
    }

    pub fn send_frame(&mut self, ty: MessageType, payload: &[u8]) -> Result<usize, TransportError> {
        self.send_raw(&encode_frame(ty, payload))
    }

    /// Writes bytes as-is. Used for the test-only garbage client too.
    pub fn send_raw(&mut self, bytes: &[u8]) -> Result<usize, TransportError> {
        self.stream.write_all(bytes).map_err(map_io)?;
        self.stream.flush().map_err(map_io)?;
        self.bytes_sent += bytes.len() as u64;
        Ok(bytes.len())
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<usize, TransportError> {
        let mut got = 0;
        while got < buf.len() {
            match self.stream.read(&mut buf[got..]) {
                Ok(0) => break,
                Ok(n) => got += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => {
                    self.bytes_received += got as u64;
                    return Err(map_io(e));
                }
            }
        }
        self.bytes_received += got as u64;
        Ok(got)
    }

    /// Reads one frame. `Ok(None)` is a clean end of stream at a frame
    /// boundary.
    pub fn recv(&mut self) -> Result<Option<HandshakeMessage>, TransportError> {
        let mut header = [0u8; FRAME_HEADER_LEN];
        match self.fill(&mut header)? {
            0 => return Ok(None),
            FRAME_HEADER_LEN => {}
            _ => return Err(DecodeError::Truncated.into()),
        }
        let (ty, len) = parse_frame_header(&header)?;
        let mut payload = vec![0u8; len];
        if self.fill(&mut payload)? != len {
            return Err(DecodeError::Truncated.into());
        }
        Ok(Some(decode_payload(ty, &payload)?))
    }

    pub fn close_write(&mut self) -> Result<(), TransportError> {
        self.stream.shutdown_write().map_err(map_io)
    }
}
