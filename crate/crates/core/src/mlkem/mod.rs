//! A working ML-KEM-512-shaped key encapsulation mechanism.
//!
//! Module-LWE over Z_3329[X]/(X^256+1) with k = 2, an incomplete NTT,
//! centered binomial noise, coefficient compression, and a
//! Fujisaki–Okamoto transform with implicit rejection. Not constant time.

mod encode;
pub mod params;
mod pke;
mod poly;
mod sample;

pub use encode::{byte_decode, byte_encode, compress, decompress};
pub use pke::{pke_decrypt, pke_encrypt, pke_keygen, PolyMatrix, PolyVec};
pub use poly::{
    bit_rev7, gamma, ntt_forward, ntt_inverse, pointwise_mul, Domain, Polynomial, ZETA,
};
pub use sample::{sample_cbd, sample_uniform};

use params::{CT_LEN, PKE_SK_LEN, PK_LEN, SK_LEN};

use crate::hash::{ct_eq, sha3_256, sha3_512, shake256};
use crate::suite::{
    check_len, codes, AlgorithmId, AlgorithmKind, CostUnits, CryptoError, KemProvider,
    SchemeMetadata, Seed, SharedSecret,
};

/// Returns `(pk, sk)` with sk = sk_pke ‖ pk ‖ H(pk) ‖ z.
pub fn kem512_keygen(seed: &Seed) -> (Vec<u8>, Vec<u8>) {
    let dz = sha3_512(&[seed]);
    let (d, z) = dz.split_at(32);
    let (pk, sk_pke) = pke_keygen(d.try_into().unwrap());
    let mut sk = Vec::with_capacity(SK_LEN);
    sk.extend_from_slice(&sk_pke);
    sk.extend_from_slice(&pk);
    sk.extend_from_slice(&sha3_256(&[&pk]));
    sk.extend_from_slice(z);
    (pk, sk)
}

fn derive_key_and_coins(m: &[u8; 32], pk_hash: &[u8]) -> ([u8; 32], [u8; 32]) {
    let g = sha3_512(&[m, pk_hash]);
    (g[..32].try_into().unwrap(), g[32..].try_into().unwrap())
}

pub fn kem512_encap(pk: &[u8], m: &Seed) -> Result<(Vec<u8>, SharedSecret), CryptoError> {
    check_len("public key", PK_LEN, pk.len())?;
    let (k, r) = derive_key_and_coins(m, &sha3_256(&[pk]));
    let ct = pke_encrypt(pk, m, &r)?;
    Ok((ct, k))
}

/// Never fails on a correctly sized ciphertext: a ciphertext that does not
/// re-encrypt identically yields SHAKE256(z ‖ ct).
pub fn kem512_decap(sk: &[u8], ct: &[u8]) -> Result<SharedSecret, CryptoError> {
    check_len("secret key", SK_LEN, sk.len())?;
    check_len("ciphertext", CT_LEN, ct.len())?;
    let (sk_pke, rest) = sk.split_at(PKE_SK_LEN);
    let (pk, rest) = rest.split_at(PK_LEN);
    let (pk_hash, z) = rest.split_at(32);

    let m = pke_decrypt(sk_pke, ct)?;
    let (k, r) = derive_key_and_coins(&m, pk_hash);
    let reencrypted = pke_encrypt(pk, &m, &r)?;
    let rejected: SharedSecret = shake256(&[z, ct], 32).try_into().unwrap();
    Ok(if ct_eq(ct, &reencrypted) { k } else { rejected })
}

#[derive(Clone, Debug)]
pub struct ToyMlKem512 {
    meta: SchemeMetadata,
}

impl ToyMlKem512 {
    pub fn new(cost: CostUnits) -> Self {
        let id = AlgorithmId::new(
            AlgorithmKind::Kem,
            "kem.toy_mlkem512",
            codes::KEM_TOY_MLKEM512,
        );
        Self {
            meta: SchemeMetadata::kem(id, PK_LEN, SK_LEN, CT_LEN, cost),
        }
    }
}

impl KemProvider for ToyMlKem512 {
    fn metadata(&self) -> &SchemeMetadata {
        &self.meta
    }

    fn keygen(&self, seed: &Seed) -> (Vec<u8>, Vec<u8>) {
        kem512_keygen(seed)
    }

    fn encap(&self, pk: &[u8], randomness: &Seed) -> (Vec<u8>, SharedSecret) {
        kem512_encap(pk, randomness).expect("registry checked the public key length")
    }

    fn decap(&self, sk: &[u8], ct: &[u8]) -> SharedSecret {
        kem512_decap(sk, ct).expect("registry checked the input lengths")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sizes() {
        let (pk, sk) = kem512_keygen(&[0; 32]);
        assert_eq!((pk.len(), sk.len()), (800, 1632));
        let (ct, _) = kem512_encap(&pk, &[0; 32]).unwrap();
        assert_eq!(ct.len(), 768);
    }

    #[test]
    fn pke_roundtrip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        for _ in 0..300 {
            let (pk, sk) = pke_keygen(&rng.gen());
            let m: [u8; 32] = rng.gen();
            let ct = pke_encrypt(&pk, &m, &rng.gen()).unwrap();
            assert_eq!(pke_decrypt(&sk, &ct).unwrap(), m);
        }
    }

    #[test]
    fn tampered_ciphertext_is_implicitly_rejected() {
        let (pk, sk) = kem512_keygen(&[7; 32]);
        let (ct, ss) = kem512_encap(&pk, &[8; 32]).unwrap();
        let mut bad = ct.clone();
        bad[100] ^= 0x10;
        let r1 = kem512_decap(&sk, &bad).unwrap();
        assert_ne!(r1, ss);
        assert_eq!(r1, kem512_decap(&sk, &bad).unwrap());
        let z = &sk[SK_LEN - 32..];
        assert_eq!(r1.to_vec(), shake256(&[z, &bad], 32));
    }

    #[test]
    fn wrong_lengths() {
        let (pk, sk) = kem512_keygen(&[1; 32]);
        assert!(kem512_encap(&pk[1..], &[0; 32]).is_err());
        assert!(kem512_decap(&sk, &[0; CT_LEN - 1]).is_err());
        assert!(pke_encrypt(&pk[..799], &[0; 32], &[0; 32]).is_err());
    }
}
