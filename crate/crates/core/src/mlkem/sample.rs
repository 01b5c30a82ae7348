use sha3::digest::XofReader;

use super::params::{N, Q};
use super::poly::{Domain, Polynomial};
use crate::suite::{check_len, CryptoError};

/// Rejection-samples 12-bit candidates below q from an XOF stream.
///
/// The result is interpreted as already being in the NTT domain, which is
/// how the public matrix is generated.
pub fn sample_uniform(stream: &mut impl XofReader) -> Polynomial {
    let mut coeffs = [0u16; N];
    let mut filled = 0;
    let mut buf = [0u8; 3];
    while filled < N {
        stream.read(&mut buf);
        let d1 = buf[0] as u16 | ((buf[1] as u16 & 0x0f) << 8);
        let d2 = (buf[1] as u16 >> 4) | ((buf[2] as u16) << 4);
        for d in [d1, d2] {
            if (d as u32) < Q && filled < N {
                coeffs[filled] = d;
                filled += 1;
            }
        }
    }
    Polynomial::from_coeffs(coeffs, Domain::Ntt)
}

/// Centered binomial sample: per coefficient, the sum of `eta` bits minus
/// the sum of the next `eta` bits. Consumes exactly `64·eta` bytes.
pub fn sample_cbd(eta: usize, bytes: &[u8]) -> Result<Polynomial, CryptoError> {
    check_len("cbd input", 64 * eta, bytes.len())?;
    let bit = |i: usize| ((bytes[i / 8] >> (i % 8)) & 1) as u32;
    let mut coeffs = [0u16; N];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let base = 2 * eta * i;
        let a: u32 = (0..eta).map(|j| bit(base + j)).sum();
        let b: u32 = (0..eta).map(|j| bit(base + eta + j)).sum();
        *c = ((a + Q - b) % Q) as u16;
    }
    Ok(Polynomial::from_coeffs(coeffs, Domain::Normal))
}
