//! Coefficient compression and little-endian bit packing.

use super::params::{N, Q};
use super::poly::{Domain, Polynomial};

/// round(2^d / q · x) mod 2^d
pub fn compress(x: u16, d: u32) -> u16 {
    let num = ((x as u64) << (d + 1)) + Q as u64;
    ((num / (2 * Q as u64)) & ((1 << d) - 1)) as u16
}

/// round(q / 2^d · y)
pub fn decompress(y: u16, d: u32) -> u16 {
    ((Q as u64 * y as u64 + (1 << (d - 1))) >> d) as u16
}

pub fn compress_poly(p: &Polynomial, d: u32) -> [u16; N] {
    p.coeffs().map(|c| compress(c, d))
}

pub fn decompress_poly(values: &[u16; N], d: u32) -> Polynomial {
    Polynomial::from_coeffs(values.map(|v| decompress(v, d)), Domain::Normal)
}

/// Packs 256 `d`-bit values into `32·d` bytes.
pub fn byte_encode(values: &[u16; N], d: u32, out: &mut Vec<u8>) {
    let mut acc = 0u32;
    let mut bits = 0;
    for &v in values {
        acc |= (v as u32 & ((1 << d) - 1)) << bits;
        bits += d;
        while bits >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            bits -= 8;
        }
    }
    debug_assert_eq!(bits, 0);
}

/// Inverse of [`byte_encode`]; 12-bit values are reduced mod q.
pub fn byte_decode(bytes: &[u8], d: u32) -> [u16; N] {
    debug_assert_eq!(bytes.len(), 32 * d as usize);
    let mut out = [0u16; N];
    let mut acc = 0u32;
    let mut bits = 0;
    let mut it = bytes.iter();
    for v in &mut out {
        while bits < d {
            acc |= (*it.next().expect("length checked") as u32) << bits;
            bits += 8;
        }
        *v = (acc & ((1 << d) - 1)) as u16;
        acc >>= d;
        bits -= d;
        if d == 12 {
            *v %= Q as u16;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centered_distance(a: u16, b: u16) -> u32 {
        let d = (a as i32 - b as i32).rem_euclid(Q as i32) as u32;
        d.min(Q - d)
    }

    #[test]
    fn zero_and_midpoint() {
        assert_eq!(compress(0, 4), 0);
        assert_eq!(decompress(0, 4), 0);
        assert_eq!(compress(1664, 1), 1);
        assert_eq!(decompress(1, 1), 1665);
    }

    #[test]
    fn exhaustive_error_bound() {
        for d in [1u32, 4, 10] {
            let bound = ((Q as f64) / f64::from(1u32 << (d + 1))).round() as u32;
            for x in 0..Q as u16 {
                let y = compress(x, d);
                assert!(y < (1 << d));
                let back = decompress(y, d);
                assert!(
                    centered_distance(back, x) <= bound,
                    "d={d} x={x} back={back}"
                );
            }
        }
    }

    #[test]
    fn packing_roundtrips() {
        for d in [1u32, 4, 10, 12] {
            let mut values = [0u16; N];
            for (i, v) in values.iter_mut().enumerate() {
                *v = ((i * 2654435761) % (1 << d)) as u16 % Q as u16;
            }
            let mut buf = Vec::new();
            byte_encode(&values, d, &mut buf);
            assert_eq!(buf.len(), 32 * d as usize);
            assert_eq!(byte_decode(&buf, d), values);
        }
    }
}
