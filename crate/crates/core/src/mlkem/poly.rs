//! Arithmetic in Z_q[X]/(X^256 + 1) with a 7-layer incomplete NTT.

use super::params::{N, Q};
use crate::suite::CryptoError;

const fn pow_mod(base: u32, mut exp: u32) -> u32 {
    let mut result = 1u64;
    let mut b = (base % Q) as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % Q as u64;
        }
        b = b * b % Q as u64;
        exp >>= 1;
    }
    result as u32
}

/// Reverses the low 7 bits of `i`.
pub const fn bit_rev7(i: u32) -> u32 {
    let mut r = 0;
    let mut j = 0;
    while j < 7 {
        r |= ((i >> j) & 1) << (6 - j);
        j += 1;
    }
    r
}

pub const ZETA: u32 = 17;

// ζ^128 ≡ −1 and ζ^256 ≡ 1: ζ is a primitive 256th root of unity mod q.
const _: () = assert!(pow_mod(ZETA, 128) == Q - 1);
const _: () = assert!(pow_mod(ZETA, 256) == 1);

/// ZETAS[i] = ζ^bitrev7(i), the butterfly twiddles in layer order.
const ZETAS: [u16; 128] = {
    let mut t = [0u16; 128];
    let mut i = 0;
    while i < 128 {
        t[i] = pow_mod(ZETA, bit_rev7(i as u32)) as u16;
        i += 1;
    }
    t
};

/// GAMMAS[i] = ζ^(2·bitrev7(i)+1), the moduli of the 128 quadratic factors.
const GAMMAS: [u16; 128] = {
    let mut t = [0u16; 128];
    let mut i = 0;
    while i < 128 {
        t[i] = pow_mod(ZETA, 2 * bit_rev7(i as u32) + 1) as u16;
        i += 1;
    }
    t
};

/// 128^-1 mod q.
const INV_128: u32 = 3303;
const _: () = assert!(128 * INV_128 % Q == 1);

pub fn gamma(i: usize) -> u16 {
    GAMMAS[i]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Normal,
    Ntt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: [u16; N],
    domain: Domain,
}

#[inline]
fn add_q(a: u16, b: u16) -> u16 {
    ((a as u32 + b as u32) % Q) as u16
}

#[inline]
fn sub_q(a: u16, b: u16) -> u16 {
    ((a as u32 + Q - b as u32) % Q) as u16
}

#[inline]
fn mul_q(a: u32, b: u32) -> u32 {
    a * b % Q
}

impl Polynomial {
    pub fn zero(domain: Domain) -> Self {
        Self {
            coeffs: [0; N],
            domain,
        }
    }

    /// Builds a polynomial from arbitrary coefficients, reducing each mod q.
    pub fn from_coeffs(coeffs: [u16; N], domain: Domain) -> Self {
        let mut p = Self { coeffs, domain };
        for c in &mut p.coeffs {
            *c %= Q as u16;
        }
        p
    }

    pub fn constant(c: u16) -> Self {
        let mut p = Self::zero(Domain::Normal);
        p.coeffs[0] = c % Q as u16;
        p
    }

    pub fn coeffs(&self) -> &[u16; N] {
        &self.coeffs
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn debug_check(&self) {
        debug_assert!(self.coeffs.iter().all(|&c| (c as u32) < Q));
    }

    fn expect_domain(&self, domain: Domain) -> Result<(), CryptoError> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(CryptoError::DomainMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u16, u16) -> u16) -> Result<Self, CryptoError> {
        other.expect_domain(self.domain)?;
        let mut out = Self::zero(self.domain);
        for ((o, &a), &b) in out.coeffs.iter_mut().zip(&self.coeffs).zip(&other.coeffs) {
            *o = f(a, b);
        }
        out.debug_check();
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, CryptoError> {
        self.zip_with(other, add_q)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CryptoError> {
        self.zip_with(other, sub_q)
    }

    pub fn ntt(&self) -> Result<Self, CryptoError> {
        ntt_forward(self)
    }

    pub fn inv_ntt(&self) -> Result<Self, CryptoError> {
        ntt_inverse(self)
    }

    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, CryptoError> {
        pointwise_mul(self, other)
    }
}

/// Forward NTT. The output holds `p mod (X² − γ_i)` for i in 0..128 as
/// consecutive coefficient pairs.
pub fn ntt_forward(p: &Polynomial) -> Result<Polynomial, CryptoError> {
    p.expect_domain(Domain::Normal)?;
    let mut f = p.coeffs.map(u32::from);
    let mut k = 1;
    let mut len = 128;
    while len >= 2 {
        for start in (0..N).step_by(2 * len) {
            let zeta = ZETAS[k] as u32;
            k += 1;
            for j in start..start + len {
                let t = mul_q(zeta, f[j + len]);
                f[j + len] = (f[j] + Q - t) % Q;
                f[j] = (f[j] + t) % Q;
            }
        }
        len /= 2;
    }
    let out = Polynomial {
        coeffs: f.map(|c| c as u16),
        domain: Domain::Ntt,
    };
    out.debug_check();
    Ok(out)
}

pub fn ntt_inverse(p: &Polynomial) -> Result<Polynomial, CryptoError> {
    p.expect_domain(Domain::Ntt)?;
    let mut f = p.coeffs.map(u32::from);
    let mut k = 127;
    let mut len = 2;
    while len <= 128 {
        for start in (0..N).step_by(2 * len) {
            let zeta = ZETAS[k] as u32;
            k -= 1;
            for j in start..start + len {
                let t = f[j];
                f[j] = (t + f[j + len]) % Q;
                f[j + len] = mul_q(zeta, (f[j + len] + Q - t) % Q);
            }
        }
        len *= 2;
    }
    let out = Polynomial {
        coeffs: f.map(|c| mul_q(c, INV_128) as u16),
        domain: Domain::Normal,
    };
    out.debug_check();
    Ok(out)
}

/// Multiplication in the NTT domain: 128 products in Z_q[X]/(X² − γ_i).
pub fn pointwise_mul(a: &Polynomial, b: &Polynomial) -> Result<Polynomial, CryptoError> {
    a.expect_domain(Domain::Ntt)?;
    b.expect_domain(Domain::Ntt)?;
    let mut out = Polynomial::zero(Domain::Ntt);
    for (i, &gamma) in GAMMAS.iter().enumerate() {
        let (a0, a1) = (a.coeffs[2 * i] as u32, a.coeffs[2 * i + 1] as u32);
        let (b0, b1) = (b.coeffs[2 * i] as u32, b.coeffs[2 * i + 1] as u32);
        let g = gamma as u32;
        out.coeffs[2 * i] = ((mul_q(a0, b0) + mul_q(mul_q(a1, b1), g)) % Q) as u16;
        out.coeffs[2 * i + 1] = ((mul_q(a0, b1) + mul_q(a1, b0)) % Q) as u16;
    }
    out.debug_check();
    Ok(out)
}
