//! The CPA-secure Module-LWE encryption scheme under the KEM.

use super::encode::{byte_decode, byte_encode, compress_poly, decompress_poly};
use super::params::*;
use super::poly::{Domain, Polynomial};
use super::sample::{sample_cbd, sample_uniform};
use crate::hash::{sha3_512, shake128_reader, shake256};
use crate::suite::{check_len, CryptoError};

/// k polynomials sharing one domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVec(pub [Polynomial; K]);

/// k×k polynomials, row-major, all in the NTT domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix(pub [[Polynomial; K]; K]);

impl PolyVec {
    fn map(
        &self,
        f: impl Fn(&Polynomial) -> Result<Polynomial, CryptoError>,
    ) -> Result<Self, CryptoError> {
        Ok(Self([f(&self.0[0])?, f(&self.0[1])?]))
    }

    pub fn ntt(&self) -> Result<Self, CryptoError> {
        self.map(Polynomial::ntt)
    }

    pub fn inv_ntt(&self) -> Result<Self, CryptoError> {
        self.map(Polynomial::inv_ntt)
    }

    pub fn add(&self, other: &Self) -> Result<Self, CryptoError> {
        Ok(Self([
            self.0[0].add(&other.0[0])?,
            self.0[1].add(&other.0[1])?,
        ]))
    }

    /// Σ self[i]·other[i] in the NTT domain.
    pub fn dot(&self, other: &Self) -> Result<Polynomial, CryptoError> {
        let mut acc = Polynomial::zero(Domain::Ntt);
        for (a, b) in self.0.iter().zip(&other.0) {
            acc = acc.add(&a.pointwise_mul(b)?)?;
        }
        Ok(acc)
    }

    fn encode12(&self, out: &mut Vec<u8>) {
        for p in &self.0 {
            byte_encode(p.coeffs(), 12, out);
        }
    }

    fn decode12(bytes: &[u8], domain: Domain) -> Self {
        let poly = |i: usize| {
            Polynomial::from_coeffs(
                byte_decode(&bytes[i * POLY_BYTES..(i + 1) * POLY_BYTES], 12),
                domain,
            )
        };
        Self([poly(0), poly(1)])
    }
}

impl PolyMatrix {
    /// Â[i][j] = SampleUniform(XOF(ρ ‖ j ‖ i)).
    pub fn expand(rho: &[u8; 32]) -> Self {
        let entry =
            |i: usize, j: usize| sample_uniform(&mut shake128_reader(&[rho, &[j as u8, i as u8]]));
        Self([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
    }

    pub fn mul_vec(&self, v: &PolyVec) -> Result<PolyVec, CryptoError> {
        Ok(PolyVec([
            PolyVec(self.0[0].clone()).dot(v)?,
            PolyVec(self.0[1].clone()).dot(v)?,
        ]))
    }

    pub fn transpose_mul_vec(&self, v: &PolyVec) -> Result<PolyVec, CryptoError> {
        let col = |j: usize| PolyVec([self.0[0][j].clone(), self.0[1][j].clone()]);
        Ok(PolyVec([col(0).dot(v)?, col(1).dot(v)?]))
    }
}

fn prf(sigma: &[u8], nonce: u8, eta: usize) -> Polynomial {
    sample_cbd(eta, &shake256(&[sigma, &[nonce]], 64 * eta)).expect("PRF output sized for eta")
}

fn noise_vec(sigma: &[u8], first_nonce: u8, eta: usize) -> PolyVec {
    PolyVec([
        prf(sigma, first_nonce, eta),
        prf(sigma, first_nonce + 1, eta),
    ])
}

fn message_poly(m: &[u8; 32]) -> Polynomial {
    let mut bits = [0u16; N];
    for (i, b) in bits.iter_mut().enumerate() {
        *b = ((m[i / 8] >> (i % 8)) & 1) as u16;
    }
    decompress_poly(&bits, 1)
}

/// Returns `(pk, sk_pke)` with pk = encode12(t̂) ‖ ρ and sk_pke = encode12(ŝ).
/// (ρ, σ) = SHA3-512(d ‖ k), as in FIPS 203.
pub fn pke_keygen(d: &[u8; 32]) -> (Vec<u8>, Vec<u8>) {
    let g = sha3_512(&[d, &[K as u8]]);
    let rho: [u8; 32] = g[..32].try_into().unwrap();
    let sigma = &g[32..];
    let a_hat = PolyMatrix::expand(&rho);
    let s_hat = noise_vec(sigma, 0, ETA1).ntt().unwrap();
    let e_hat = noise_vec(sigma, K as u8, ETA1).ntt().unwrap();
    let t_hat = a_hat.mul_vec(&s_hat).unwrap().add(&e_hat).unwrap();

    let mut pk = Vec::with_capacity(PK_LEN);
    t_hat.encode12(&mut pk);
    pk.extend_from_slice(&rho);
    let mut sk = Vec::with_capacity(PKE_SK_LEN);
    s_hat.encode12(&mut sk);
    (pk, sk)
}

pub fn pke_encrypt(pk: &[u8], m: &[u8; 32], coins: &[u8; 32]) -> Result<Vec<u8>, CryptoError> {
    check_len("public key", PK_LEN, pk.len())?;
    let t_hat = PolyVec::decode12(&pk[..PKE_SK_LEN], Domain::Ntt);
    let rho: [u8; 32] = pk[PKE_SK_LEN..].try_into().unwrap();
    let a_hat = PolyMatrix::expand(&rho);

    let r_hat = noise_vec(coins, 0, ETA1).ntt()?;
    let e1 = noise_vec(coins, K as u8, ETA2);
    let e2 = prf(coins, 2 * K as u8, ETA2);

    let u = a_hat.transpose_mul_vec(&r_hat)?.inv_ntt()?.add(&e1)?;
    let v = t_hat
        .dot(&r_hat)?
        .inv_ntt()?
        .add(&e2)?
        .add(&message_poly(m))?;

    let mut ct = Vec::with_capacity(CT_LEN);
    for p in &u.0 {
        byte_encode(&compress_poly(p, DU), DU, &mut ct);
    }
    byte_encode(&compress_poly(&v, DV), DV, &mut ct);
    Ok(ct)
}

pub fn pke_decrypt(sk: &[u8], ct: &[u8]) -> Result<[u8; 32], CryptoError> {
    check_len("pke secret key", PKE_SK_LEN, sk.len())?;
    check_len("ciphertext", CT_LEN, ct.len())?;
    let s_hat = PolyVec::decode12(sk, Domain::Ntt);
    let u_bytes = 32 * DU as usize;
    let u = PolyVec([
        decompress_poly(&byte_decode(&ct[..u_bytes], DU), DU),
        decompress_poly(&byte_decode(&ct[u_bytes..2 * u_bytes], DU), DU),
    ]);
    let v = decompress_poly(&byte_decode(&ct[2 * u_bytes..], DV), DV);
    let w = v.sub(&s_hat.dot(&u.ntt()?)?.inv_ntt()?)?;

    let bits = compress_poly(&w, 1);
    let mut m = Vec::with_capacity(32);
    byte_encode(&bits, 1, &mut m);
    Ok(m.try_into().unwrap())
}
