//! Post-quantum TLS-style handshake with pluggable KEM and signature
//! providers, plus a handshake-rate benchmark.
//!
//! - [`suite`]: provider contracts, registry, size-calibrated mocks
//! - [`mlkem`]: a working ML-KEM-512-shaped KEM
//! - [`hashsig`]: a stateful WOTS + Merkle signature
//! - [`handshake`]: messages, codec, key schedule, client/server flows
//! - [`transport`]: framed TCP and in-memory transports, concurrent server
//! - [`bench`]: live and closed-form handshakes-per-second measurement

pub mod bench;
pub mod handshake;
pub mod hash;
pub mod hashsig;
pub mod mlkem;
pub mod par;
pub mod suite;
pub mod transport;
