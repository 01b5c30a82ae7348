//! Fixed primitive family shared by every component: SHA3-256, SHA3-512,
//! SHAKE128/256 and HMAC-SHA-256.

use hmac::{Hmac, Mac};
use sha2::Sha256;
use sha3::digest::{Digest, ExtendableOutput, Update, XofReader};
use sha3::{Sha3_256, Sha3_512, Shake128, Shake256};

pub type Digest32 = [u8; 32];

pub fn sha3_256(parts: &[&[u8]]) -> Digest32 {
    let mut h = Sha3_256::new();
    for p in parts {
        Digest::update(&mut h, p);
    }
    h.finalize().into()
}

pub fn sha3_512(parts: &[&[u8]]) -> [u8; 64] {
    let mut h = Sha3_512::new();
    for p in parts {
        Digest::update(&mut h, p);
    }
    h.finalize().into()
}

/// SHAKE128 reader positioned at the start of the output stream.
pub fn shake128_reader(parts: &[&[u8]]) -> impl XofReader {
    let mut x = Shake128::default();
    for p in parts {
        x.update(p);
    }
    x.finalize_xof()
}

pub fn shake128(parts: &[&[u8]], out_len: usize) -> Vec<u8> {
    let mut out = vec![0u8; out_len];
    shake128_reader(parts).read(&mut out);
    out
}

pub fn shake256(parts: &[&[u8]], out_len: usize) -> Vec<u8> {
    let mut x = Shake256::default();
    for p in parts {
        x.update(p);
    }
    let mut out = vec![0u8; out_len];
    x.finalize_xof().read(&mut out);
    out
}

pub fn hmac_sha256(key: &[u8], parts: &[&[u8]]) -> Digest32 {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    for p in parts {
        Mac::update(&mut mac, p);
    }
    mac.finalize().into_bytes().into()
}

/// Equality that does not short-circuit on the first differing byte.
pub fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// Derives an independent 32-byte seed from a parent seed and a label.
pub fn derive_seed(parent: &[u8], label: &[u8]) -> Digest32 {
    sha3_256(&[b"pqtls seed", parent, label])
}
