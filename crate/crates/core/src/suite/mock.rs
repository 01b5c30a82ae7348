//! Deterministic, INSECURE stand-ins sized like real schemes.
//!
//! These exist only to exercise the protocol and the benchmark harness with
//! realistic byte counts and configurable compute cost. The secret key is
//! recoverable from public data; never use them to protect anything.

use super::{
    burn, AlgorithmId, AlgorithmKind, CostUnits, CryptoError, KemProvider, SchemeMetadata, Seed,
    SharedSecret, SigProvider, SigSecretKey,
};
use crate::hash::{ct_eq, hmac_sha256, sha3_256, shake128};

const SEED_LEN: usize = 32;

/// sk = seed; pk = XOF(sk ‖ 0x01); ct = r ‖ XOF(r ‖ 0x02); ss = H(pk ‖ r).
#[derive(Clone, Debug)]
pub struct MockKem {
    meta: SchemeMetadata,
}

impl MockKem {
    pub fn new(name: &str, wire_code: u16, pk_len: usize, ct_len: usize, cost: CostUnits) -> Self {
        assert!(
            ct_len >= SEED_LEN,
            "mock ciphertext embeds 32 bytes of randomness"
        );
        let id = AlgorithmId::new(AlgorithmKind::Kem, name, wire_code);
        Self {
            meta: SchemeMetadata::kem(id, pk_len, SEED_LEN, ct_len, cost),
        }
    }

    fn public_key(&self, sk: &[u8]) -> Vec<u8> {
        shake128(&[sk, &[0x01]], self.meta.pk_len)
    }
}

impl KemProvider for MockKem {
    fn metadata(&self) -> &SchemeMetadata {
        &self.meta
    }

    fn keygen(&self, seed: &Seed) -> (Vec<u8>, Vec<u8>) {
        burn(self.meta.cost.keygen, seed);
        (self.public_key(seed), seed.to_vec())
    }

    fn encap(&self, pk: &[u8], randomness: &Seed) -> (Vec<u8>, SharedSecret) {
        burn(self.meta.cost.op, randomness);
        let mut ct = randomness.to_vec();
        ct.extend(shake128(
            &[randomness, &[0x02]],
            self.meta.out_len - SEED_LEN,
        ));
        (ct, sha3_256(&[pk, randomness]))
    }

    fn decap(&self, sk: &[u8], ct: &[u8]) -> SharedSecret {
        let r: &Seed = ct[..SEED_LEN].try_into().expect("length checked");
        burn(self.meta.cost.verify, r);
        sha3_256(&[&self.public_key(sk), r])
    }
}

/// sk = seed; pk = seed ‖ XOF(seed ‖ 0x03); sig = tag ‖ XOF(tag) with
/// tag = HMAC(seed, message). The verifier reads the seed out of pk.
#[derive(Clone, Debug)]
pub struct MockSig {
    meta: SchemeMetadata,
}

impl MockSig {
    pub fn new(name: &str, wire_code: u16, pk_len: usize, sig_len: usize, cost: CostUnits) -> Self {
        assert!(pk_len >= SEED_LEN && sig_len >= SEED_LEN);
        let id = AlgorithmId::new(AlgorithmKind::Sig, name, wire_code);
        Self {
            meta: SchemeMetadata::sig(id, pk_len, SEED_LEN, sig_len, cost),
        }
    }

    fn public_key(&self, seed: &[u8]) -> Vec<u8> {
        let mut pk = seed.to_vec();
        pk.extend(shake128(&[seed, &[0x03]], self.meta.pk_len - SEED_LEN));
        pk
    }

    fn signature(&self, seed: &[u8], message: &[u8]) -> Vec<u8> {
        let tag = hmac_sha256(seed, &[message]);
        let mut sig = tag.to_vec();
        sig.extend(shake128(&[&tag], self.meta.out_len - SEED_LEN));
        sig
    }
}

impl SigProvider for MockSig {
    fn metadata(&self) -> &SchemeMetadata {
        &self.meta
    }

    fn keygen(&self, seed: &Seed) -> (Vec<u8>, SigSecretKey) {
        burn(self.meta.cost.keygen, seed);
        (
            self.public_key(seed),
            SigSecretKey::stateless(seed.to_vec()),
        )
    }

    fn sign(&self, sk: &SigSecretKey, message: &[u8]) -> Result<Vec<u8>, CryptoError> {
        let seed = sk.bytes();
        burn(self.meta.cost.op, &sha3_256(&[message]));
        Ok(self.signature(seed, message))
    }

    fn verify(&self, pk: &[u8], message: &[u8], signature: &[u8]) -> bool {
        burn(self.meta.cost.verify, &sha3_256(&[message]));
        let seed = &pk[..SEED_LEN];
        ct_eq(&self.public_key(seed), pk) & ct_eq(&self.signature(seed, message), signature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kem() -> MockKem {
        MockKem::new("kem.test", 0x7001, 100, 64, CostUnits::default())
    }

    #[test]
    fn kem_ciphertext_starts_with_randomness() {
        let kem = kem();
        let (pk, _) = kem.keygen(&[4; 32]);
        let (ct, _) = kem.encap(&pk, &[0xAB; 32]);
        assert_eq!(&ct[..32], &[0xAB; 32]);
        assert_eq!(ct.len(), 64);
    }

    #[test]
    fn kem_matches_the_documented_construction() {
        let kem = kem();
        let seed = [1u8; 32];
        let (pk, sk) = kem.keygen(&seed);
        assert_eq!(sk, seed);
        assert_eq!(pk, shake128(&[&seed, &[1]], 100));
        let r = [2u8; 32];
        let (ct, ss) = kem.encap(&pk, &r);
        assert_eq!(&ct[32..], &shake128(&[&r, &[2]], 32)[..]);
        assert_eq!(ss, sha3_256(&[&pk, &r]));
        assert_eq!(kem.decap(&sk, &ct), ss);
    }

    #[test]
    fn sig_public_key_embeds_the_seed() {
        let sig = MockSig::new("sig.test", 0x7002, 64, 48, CostUnits::default());
        let (pk, sk) = sig.keygen(&[5; 32]);
        assert_eq!(&pk[..32], &[5; 32]);
        let s = sig.sign(&sk, b"m").unwrap();
        assert_eq!(&s[..32], &hmac_sha256(&[5; 32], &[b"m"]));
        assert!(sig.verify(&pk, b"m", &s));
        assert!(!sig.verify(&pk, b"n", &s));
    }
}
