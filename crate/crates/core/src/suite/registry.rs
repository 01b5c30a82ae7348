use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use super::codes::*;
use super::{
    check_len, AlgorithmKind, CostUnits, CryptoError, KemKeyPair, KemProvider, MockKem, MockSig,
    SchemeMetadata, Seed, SharedSecret, SigKeyPair, SigProvider, SigSecretKey,
};
use crate::hashsig::ToyHashSig;
use crate::mlkem::ToyMlKem512;

#[derive(Clone)]
pub enum RegistryEntry {
    Kem(Arc<dyn KemProvider>),
    Sig(Arc<dyn SigProvider>),
}

impl RegistryEntry {
    pub fn metadata(&self) -> &SchemeMetadata {
        match self {
            RegistryEntry::Kem(p) => p.metadata(),
            RegistryEntry::Sig(p) => p.metadata(),
        }
    }
}

/// Wire code → provider map. Every entry point length-checks its inputs
/// against the scheme metadata and checks provider outputs on the way back.
#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<u16, RegistryEntry>,
    names: HashMap<String, u16>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Toy ML-KEM-512, toy WOTS/Merkle, and the size-calibrated mocks.
    ///
    /// Mock sizes follow the public parameter tables of the named schemes;
    /// cost units are calibration knobs in hash compressions.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        let kems: Vec<Arc<dyn KemProvider>> = vec![
            Arc::new(ToyMlKem512::new(CostUnits::new(25, 35, 40))),
            Arc::new(MockKem::new(
                "kem.mock.kyber512",
                KEM_MOCK_KYBER512,
                800,
                768,
                CostUnits::new(25, 35, 40),
            )),
            Arc::new(MockKem::new(
                "kem.mock.kyber768",
                KEM_MOCK_KYBER768,
                1184,
                1088,
                CostUnits::new(40, 55, 60),
            )),
            Arc::new(MockKem::new(
                "kem.mock.ecdhe_x25519",
                KEM_MOCK_X25519,
                32,
                32,
                CostUnits::new(30, 60, 30),
            )),
        ];
        let sigs: Vec<Arc<dyn SigProvider>> = vec![
            Arc::new(ToyHashSig::new(CostUnits::new(1_000_000, 600, 600))),
            Arc::new(MockSig::new(
                "sig.mock.falcon512",
                SIG_MOCK_FALCON512,
                897,
                666,
                CostUnits::new(8_000, 400, 60),
            )),
            Arc::new(MockSig::new(
                "sig.mock.dilithium2",
                SIG_MOCK_DILITHIUM2,
                1312,
                2420,
                CostUnits::new(250, 800, 250),
            )),
            Arc::new(MockSig::new(
                "sig.mock.sphincs128s",
                SIG_MOCK_SPHINCS128S,
                32,
                7856,
                CostUnits::new(20_000, 60_000, 900),
            )),
            Arc::new(MockSig::new(
                "sig.mock.rsa2048",
                SIG_MOCK_RSA2048,
                270,
                256,
                CostUnits::new(50_000, 1_500, 40),
            )),
        ];
        for k in kems {
            r.register_kem(k).expect("default registry is consistent");
        }
        for s in sigs {
            r.register_sig(s).expect("default registry is consistent");
        }
        r
    }

    fn insert(&mut self, entry: RegistryEntry) -> Result<(), CryptoError> {
        let meta = entry.metadata().clone();
        meta.validate()?;
        let code = meta.code();
        if self.entries.contains_key(&code) {
            return Err(CryptoError::Duplicate(format!("wire code 0x{code:04x}")));
        }
        if self.names.contains_key(&meta.id.name) {
            return Err(CryptoError::Duplicate(meta.id.name));
        }
        self.names.insert(meta.id.name, code);
        self.entries.insert(code, entry);
        Ok(())
    }

    pub fn register_kem(&mut self, provider: Arc<dyn KemProvider>) -> Result<(), CryptoError> {
        if provider.metadata().id.kind != AlgorithmKind::Kem {
            return Err(CryptoError::ProviderContract(
                "KEM provider with SIG metadata".into(),
            ));
        }
        self.insert(RegistryEntry::Kem(provider))
    }

    pub fn register_sig(&mut self, provider: Arc<dyn SigProvider>) -> Result<(), CryptoError> {
        if provider.metadata().id.kind != AlgorithmKind::Sig {
            return Err(CryptoError::ProviderContract(
                "SIG provider with KEM metadata".into(),
            ));
        }
        self.insert(RegistryEntry::Sig(provider))
    }

    pub fn lookup(&self, code: u16) -> Result<&RegistryEntry, CryptoError> {
        self.entries
            .get(&code)
            .ok_or(CryptoError::UnknownAlgorithm(code))
    }

    pub fn metadata(&self, code: u16) -> Result<&SchemeMetadata, CryptoError> {
        self.lookup(code).map(RegistryEntry::metadata)
    }

    pub fn contains(&self, code: u16) -> bool {
        self.entries.contains_key(&code)
    }

    pub fn kem(&self, code: u16) -> Result<&Arc<dyn KemProvider>, CryptoError> {
        match self.lookup(code)? {
            RegistryEntry::Kem(p) => Ok(p),
            RegistryEntry::Sig(_) => Err(CryptoError::WrongKind {
                code,
                expected: AlgorithmKind::Kem,
            }),
        }
    }

    pub fn sig(&self, code: u16) -> Result<&Arc<dyn SigProvider>, CryptoError> {
        match self.lookup(code)? {
            RegistryEntry::Sig(p) => Ok(p),
            RegistryEntry::Kem(_) => Err(CryptoError::WrongKind {
                code,
                expected: AlgorithmKind::Sig,
            }),
        }
    }

    /// Accepts a registered name (`kem.mock.kyber768`), its last segment
    /// when unambiguous (`kyber768`), a hex code (`0x0103`) or a decimal code.
    pub fn resolve(&self, text: &str) -> Result<u16, CryptoError> {
        let text = text.trim();
        if let Some(&code) = self.names.get(text) {
            return Ok(code);
        }
        let mut by_suffix = self
            .names
            .iter()
            .filter(|(name, _)| name.rsplit('.').next() == Some(text))
            .map(|(_, &code)| code);
        if let (Some(code), None) = (by_suffix.next(), by_suffix.next()) {
            return Ok(code);
        }
        let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            Some(hex) => u16::from_str_radix(hex, 16).ok(),
            None => text.parse::<u16>().ok(),
        };
        match parsed {
            Some(code) if self.contains(code) => Ok(code),
            Some(code) => Err(CryptoError::UnknownAlgorithm(code)),
            None => Err(CryptoError::UnknownName(text.to_string())),
        }
    }

    /// All schemes ordered by wire code.
    pub fn iter(&self) -> impl Iterator<Item = &SchemeMetadata> {
        self.entries.values().map(RegistryEntry::metadata)
    }

    pub fn codes_of(&self, kind: AlgorithmKind) -> Vec<u16> {
        self.iter()
            .filter(|m| m.id.kind == kind)
            .map(SchemeMetadata::code)
            .collect()
    }

    pub fn kem_keygen(&self, code: u16, seed: &Seed) -> Result<KemKeyPair, CryptoError> {
        let p = self.kem(code)?;
        let meta = p.metadata();
        let (public_key, secret_key) = p.keygen(seed);
        contract("pk", meta.pk_len, public_key.len())?;
        contract("sk", meta.sk_len, secret_key.len())?;
        Ok(KemKeyPair {
            alg: code,
            public_key,
            secret_key,
        })
    }

    pub fn kem_encap(
        &self,
        code: u16,
        pk: &[u8],
        randomness: &Seed,
    ) -> Result<(Vec<u8>, SharedSecret), CryptoError> {
        let p = self.kem(code)?;
        check_len("public key", p.metadata().pk_len, pk.len())?;
        let (ct, ss) = p.encap(pk, randomness);
        contract("ciphertext", p.metadata().out_len, ct.len())?;
        Ok((ct, ss))
    }

    pub fn kem_decap(&self, code: u16, sk: &[u8], ct: &[u8]) -> Result<SharedSecret, CryptoError> {
        let p = self.kem(code)?;
        check_len("secret key", p.metadata().sk_len, sk.len())?;
        check_len("ciphertext", p.metadata().out_len, ct.len())?;
        Ok(p.decap(sk, ct))
    }

    pub fn sig_keygen(&self, code: u16, seed: &Seed) -> Result<SigKeyPair, CryptoError> {
        let p = self.sig(code)?;
        let meta = p.metadata();
        let (public_key, secret_key) = p.keygen(seed);
        contract("pk", meta.pk_len, public_key.len())?;
        contract("sk", meta.sk_len, secret_key.bytes().len())?;
        Ok(SigKeyPair {
            alg: code,
            public_key,
            secret_key,
        })
    }

    pub fn sig_sign(
        &self,
        code: u16,
        sk: &SigSecretKey,
        message: &[u8],
    ) -> Result<Vec<u8>, CryptoError> {
        let p = self.sig(code)?;
        check_len("secret key", p.metadata().sk_len, sk.bytes().len())?;
        let sig = p.sign(sk, message)?;
        contract("signature", p.metadata().out_len, sig.len())?;
        Ok(sig)
    }

    pub fn sig_verify(
        &self,
        code: u16,
        pk: &[u8],
        message: &[u8],
        signature: &[u8],
    ) -> Result<bool, CryptoError> {
        let p = self.sig(code)?;
        check_len("public key", p.metadata().pk_len, pk.len())?;
        check_len("signature", p.metadata().out_len, signature.len())?;
        Ok(p.verify(pk, message, signature))
    }

    /// One CSV line per scheme, header first.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from(
            "wire_code,name,kind,pk_len,sk_len,ct_or_sig_len,cost_keygen,cost_op,cost_verify\n",
        );
        for m in self.iter() {
            let _ = writeln!(
                out,
                "0x{:04x},{},{},{},{},{},{},{},{}",
                m.code(),
                m.id.name,
                m.id.kind,
                m.pk_len,
                m.sk_len,
                m.out_len,
                m.cost.keygen,
                m.cost.op,
                m.cost.verify
            );
        }
        out
    }
}

fn contract(field: &str, expected: usize, actual: usize) -> Result<(), CryptoError> {
    if expected == actual {
        Ok(())
    } else {
        Err(CryptoError::ProviderContract(format!(
            "{field} is {actual} bytes, metadata says {expected}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn default_sizes_match_published_tables() {
        let r = Registry::with_defaults();
        // (code, pk, ct_or_sig)
        let table = [
            (KEM_TOY_MLKEM512, 800, 768),
            (KEM_MOCK_KYBER512, 800, 768),
            (KEM_MOCK_KYBER768, 1184, 1088),
            (KEM_MOCK_X25519, 32, 32),
            (SIG_MOCK_FALCON512, 897, 666),
            (SIG_MOCK_DILITHIUM2, 1312, 2420),
            (SIG_MOCK_SPHINCS128S, 32, 7856),
            (SIG_MOCK_RSA2048, 270, 256),
            (SIG_TOY_WOTS_MERKLE, 32, 2468),
        ];
        for (code, pk, out) in table {
            let m = r.metadata(code).unwrap();
            assert_eq!((m.pk_len, m.out_len), (pk, out), "{}", m.id.name);
        }
        let sig_len = |c| r.metadata(c).unwrap().out_len;
        assert!(sig_len(SIG_MOCK_FALCON512) < sig_len(SIG_MOCK_DILITHIUM2));
        assert!(sig_len(SIG_MOCK_DILITHIUM2) < sig_len(SIG_MOCK_SPHINCS128S));
        for m in r.iter().filter(|m| m.id.kind == AlgorithmKind::Kem) {
            assert_eq!(m.ss_len, 32);
        }
    }

    #[test]
    fn names_and_codes_are_a_bijection() {
        let r = Registry::with_defaults();
        for m in r.iter() {
            assert_eq!(r.resolve(&m.id.name).unwrap(), m.code());
            assert_eq!(r.resolve(&format!("0x{:04x}", m.code())).unwrap(), m.code());
            assert_eq!(r.resolve(&m.code().to_string()).unwrap(), m.code());
        }
        assert_eq!(
            r.resolve("kem.nope"),
            Err(CryptoError::UnknownName("kem.nope".into()))
        );
        assert_eq!(r.resolve("kyber768"), Ok(KEM_MOCK_KYBER768));
        assert_eq!(
            r.resolve("mock.kyber768"),
            Err(CryptoError::UnknownName("mock.kyber768".into()))
        );
        assert_eq!(
            r.resolve("0xbeef"),
            Err(CryptoError::UnknownAlgorithm(0xbeef))
        );
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let mut r = Registry::with_defaults();
        let dup_code = MockKem::new("kem.other", KEM_MOCK_X25519, 32, 32, CostUnits::default());
        assert!(matches!(
            r.register_kem(Arc::new(dup_code)),
            Err(CryptoError::Duplicate(_))
        ));
        let dup_name = MockKem::new("kem.mock.kyber768", 0x7777, 32, 32, CostUnits::default());
        assert!(matches!(
            r.register_kem(Arc::new(dup_name)),
            Err(CryptoError::Duplicate(_))
        ));
    }

    #[test]
    fn kyber768_mock_keygen_shape_and_determinism() {
        let r = Registry::with_defaults();
        let a = r.kem_keygen(KEM_MOCK_KYBER768, &[0; 32]).unwrap();
        assert_eq!((a.public_key.len(), a.secret_key.len()), (1184, 32));
        assert_eq!(a, r.kem_keygen(KEM_MOCK_KYBER768, &[0; 32]).unwrap());
    }

    #[test]
    fn kind_mismatch_and_unknown_codes() {
        let r = Registry::with_defaults();
        assert_eq!(
            r.kem_keygen(SIG_MOCK_FALCON512, &[0; 32]).unwrap_err(),
            CryptoError::WrongKind {
                code: SIG_MOCK_FALCON512,
                expected: AlgorithmKind::Kem
            }
        );
        assert!(matches!(
            r.sig_keygen(KEM_MOCK_X25519, &[0; 32]),
            Err(CryptoError::WrongKind { .. })
        ));
        assert_eq!(
            r.kem_keygen(0x9999, &[0; 32]).unwrap_err(),
            CryptoError::UnknownAlgorithm(0x9999)
        );
    }

    #[test]
    fn length_errors() {
        let r = Registry::with_defaults();
        for code in r.codes_of(AlgorithmKind::Kem) {
            let kp = r.kem_keygen(code, &[3; 32]).unwrap();
            let short_pk = &kp.public_key[..kp.public_key.len() - 1];
            assert!(matches!(
                r.kem_encap(code, short_pk, &[0; 32]),
                Err(CryptoError::WrongLength { .. })
            ));
            let (ct, _) = r.kem_encap(code, &kp.public_key, &[1; 32]).unwrap();
            let short_ct = &ct[..ct.len() - 1];
            assert!(matches!(
                r.kem_decap(code, &kp.secret_key, short_ct),
                Err(CryptoError::WrongLength { .. })
            ));
        }
    }

    #[test]
    fn every_kem_roundtrips_over_random_seeds() {
        let r = Registry::with_defaults();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for code in r.codes_of(AlgorithmKind::Kem) {
            for _ in 0..1000 {
                let kp = r.kem_keygen(code, &rng.gen()).unwrap();
                let (ct, ss) = r.kem_encap(code, &kp.public_key, &rng.gen()).unwrap();
                assert_eq!(ct.len(), r.metadata(code).unwrap().out_len);
                assert_eq!(r.kem_decap(code, &kp.secret_key, &ct).unwrap(), ss);
            }
        }
    }

    #[test]
    fn mock_signatures_reject_single_bit_flips() {
        let r = Registry::with_defaults();
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        for code in [
            SIG_MOCK_FALCON512,
            SIG_MOCK_DILITHIUM2,
            SIG_MOCK_SPHINCS128S,
            SIG_MOCK_RSA2048,
        ] {
            let kp = r.sig_keygen(code, &rng.gen()).unwrap();
            let msg: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
            let sig = r.sig_sign(code, &kp.secret_key, &msg).unwrap();
            assert_eq!(sig.len(), r.metadata(code).unwrap().out_len);
            assert!(r.sig_verify(code, &kp.public_key, &msg, &sig).unwrap());
            for _ in 0..100 {
                let mut m = msg.clone();
                let mut s = sig.clone();
                if rng.gen() {
                    let i = rng.gen_range(0..m.len() * 8);
                    m[i / 8] ^= 1 << (i % 8);
                } else {
                    let i = rng.gen_range(0..s.len() * 8);
                    s[i / 8] ^= 1 << (i % 8);
                }
                assert!(!r.sig_verify(code, &kp.public_key, &m, &s).unwrap());
            }
        }
    }

    #[test]
    fn dump_has_header_and_one_line_per_scheme() {
        let r = Registry::with_defaults();
        let csv = r.dump_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "wire_code,name,kind,pk_len,sk_len,ct_or_sig_len,cost_keygen,cost_op,cost_verify"
        );
        assert_eq!(lines.len(), 1 + r.iter().count());
        assert!(lines.contains(&"0x0204,sig.mock.sphincs128s,SIG,32,32,7856,20000,60000,900"));
    }
}
