//! Client and server state machines for the single round trip:
//! ClientHello →, ← ServerHello, Finished →.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use super::cert::{cert_issue, TrustAnchor, TrustStore};
use super::keys::{finished_mac, key_schedule, SessionKeys};
use super::messages::*;
use crate::hash::{ct_eq, derive_seed, sha3_256};
use crate::par::Exec;
use crate::suite::{AlgorithmKind, CryptoError, KemKeyPair, Registry, Seed, SigKeyPair};

pub const DEFAULT_SUBJECT: &str = "pqtls server";

/// Nanoseconds spent per handshake phase on one side of the connection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseTimes {
    pub keygen_ns: u64,
    /// Encapsulation (server) or decapsulation (client).
    pub kem_ns: u64,
    /// Signing (server) or certificate + transcript verification (client).
    pub sig_ns: u64,
    pub kdf_ns: u64,
}

fn elapsed_ns(t: Instant) -> u64 {
    t.elapsed().as_nanos() as u64
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("no signature algorithms offered")]
    NoSignatureAlgorithms,
    #[error("at most {MAX_SIG_ALGS} signature algorithms may be offered")]
    TooManySignatureAlgorithms,
    #[error("signature algorithm 0x{0:04x} offered twice")]
    DuplicateSignatureAlgorithm(u16),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

fn transcript_hash(ch_payload: &[u8], sh_part: &[u8]) -> [u8; 32] {
    sha3_256(&[ch_payload, sh_part])
}

#[derive(Clone)]
pub struct ClientConfig {
    pub registry: Arc<Registry>,
    pub kem_alg: u16,
    /// Offered in preference order.
    pub sig_algs: Vec<u16>,
    pub trust: TrustStore,
}

impl ClientConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sig_algs.is_empty() {
            return Err(ConfigError::NoSignatureAlgorithms);
        }
        if self.sig_algs.len() > MAX_SIG_ALGS {
            return Err(ConfigError::TooManySignatureAlgorithms);
        }
        for (i, s) in self.sig_algs.iter().enumerate() {
            if self.sig_algs[..i].contains(s) {
                return Err(ConfigError::DuplicateSignatureAlgorithm(*s));
            }
            self.registry.sig(*s)?;
        }
        self.registry.kem(self.kem_alg)?;
        Ok(())
    }
}

/// Client state between sending ClientHello and receiving ServerHello.
pub struct ClientPending {
    config: ClientConfig,
    hello: ClientHello,
    ch_payload: Vec<u8>,
    kem_keys: KemKeyPair,
    times: PhaseTimes,
    decap_calls: u32,
}

impl ClientPending {
    pub fn hello(&self) -> &ClientHello {
        &self.hello
    }

    /// Decapsulations performed so far; stays 0 if authentication failed.
    pub fn decap_calls(&self) -> u32 {
        self.decap_calls
    }

    pub fn times(&self) -> PhaseTimes {
        self.times
    }
}

#[derive(Clone, Debug)]
pub struct ClientFinish {
    pub keys: SessionKeys,
    pub finished: Finished,
    pub times: PhaseTimes,
}

/// Generates a fresh ephemeral KEM keypair and the ClientHello carrying it.
pub fn client_begin(
    config: &ClientConfig,
    seed: &Seed,
) -> Result<(ClientHello, ClientPending), ConfigError> {
    config.validate()?;
    let mut times = PhaseTimes::default();
    let t = Instant::now();
    let kem_keys = config
        .registry
        .kem_keygen(config.kem_alg, &derive_seed(seed, b"kem keygen"))?;
    times.keygen_ns = elapsed_ns(t);
    let hello = ClientHello {
        version: PROTOCOL_VERSION,
        client_random: derive_seed(seed, b"client random"),
        kem_alg: config.kem_alg,
        sig_algs: config.sig_algs.clone(),
        kem_public_key: kem_keys.public_key.clone(),
    };
    let pending = ClientPending {
        config: config.clone(),
        ch_payload: hello.encode_payload(),
        hello: hello.clone(),
        kem_keys,
        times,
        decap_calls: 0,
    };
    Ok((hello, pending))
}

/// Checks run in a fixed order: certificate, transcript signature,
/// decapsulation, key derivation.
pub fn client_process_server_hello(
    pending: &mut ClientPending,
    sh: &ServerHello,
) -> Result<ClientFinish, Alert> {
    let registry = &pending.config.registry;
    if sh.chosen_kem != pending.hello.kem_alg {
        return Err(Alert::new(
            AlertCode::UnsupportedAlgorithm,
            "server chose a KEM that was not offered",
        ));
    }
    if !pending.hello.sig_algs.contains(&sh.chosen_sig) {
        return Err(Alert::new(
            AlertCode::UnsupportedAlgorithm,
            "server chose a signature that was not offered",
        ));
    }
    let kem_meta = registry
        .metadata(sh.chosen_kem)
        .map_err(|e| Alert::new(AlertCode::UnsupportedAlgorithm, e.to_string()))?;
    let sig_meta = registry
        .metadata(sh.chosen_sig)
        .map_err(|e| Alert::new(AlertCode::UnsupportedAlgorithm, e.to_string()))?;
    if sh.kem_ciphertext.len() != kem_meta.out_len || sh.signature.len() != sig_meta.out_len {
        return Err(Alert::new(
            AlertCode::DecodeError,
            "ciphertext or signature length",
        ));
    }

    let t = Instant::now();
    let cert = sh
        .parse_certificate()
        .map_err(|e| Alert::new(AlertCode::BadCertificate, e.to_string()))?;
    if cert.sig_alg != sh.chosen_sig {
        return Err(Alert::new(
            AlertCode::BadCertificate,
            "certificate algorithm mismatch",
        ));
    }
    if !pending.config.trust.verify(registry, &cert) {
        return Err(Alert::new(
            AlertCode::BadCertificate,
            "certificate not issued by a trusted root",
        ));
    }

    let th1 = transcript_hash(&pending.ch_payload, &sh.encode_signed_prefix());
    let sig_ok = registry
        .sig_verify(sh.chosen_sig, &cert.subject_pk, &th1, &sh.signature)
        .unwrap_or(false);
    pending.times.sig_ns = elapsed_ns(t);
    if !sig_ok {
        return Err(Alert::new(
            AlertCode::BadSignature,
            "transcript signature does not verify",
        ));
    }

    let t = Instant::now();
    pending.decap_calls += 1;
    let ss = registry
        .kem_decap(
            sh.chosen_kem,
            &pending.kem_keys.secret_key,
            &sh.kem_ciphertext,
        )
        .map_err(|e| Alert::new(AlertCode::DecodeError, e.to_string()))?;
    pending.times.kem_ns = elapsed_ns(t);

    let t = Instant::now();
    let th2 = transcript_hash(&pending.ch_payload, &sh.encode_payload());
    let keys = key_schedule(&ss, &th2);
    let finished = Finished {
        mac: finished_mac(&keys.client_finished_key, &th2),
    };
    pending.times.kdf_ns = elapsed_ns(t);
    Ok(ClientFinish {
        keys,
        finished,
        times: pending.times,
    })
}

/// A server signing key with the certificate that vouches for it.
#[derive(Clone, Debug)]
pub struct Credential {
    pub keypair: SigKeyPair,
    pub certificate: Certificate,
    encoded_certificate: Vec<u8>,
}

/// Long-term server material: supported KEMs and one credential per
/// supported signature algorithm.
#[derive(Clone)]
pub struct ServerIdentity {
    registry: Arc<Registry>,
    kems: Vec<u16>,
    credentials: BTreeMap<u16, Credential>,
}

fn root_seed(seed: &Seed, alg: u16) -> Seed {
    derive_seed(seed, &[b"root ".as_slice(), &alg.to_be_bytes()].concat())
}

fn leaf_seed(seed: &Seed, alg: u16) -> Seed {
    derive_seed(seed, &[b"leaf ".as_slice(), &alg.to_be_bytes()].concat())
}

impl ServerIdentity {
    /// Derives a root and a leaf key per signature algorithm from `seed` and
    /// issues the leaf certificates. Returns the matching trust store.
    ///
    /// Anyone holding `seed` can rebuild the trust store with
    /// [`ServerIdentity::trust_store_for`]; this is demo PKI, not a CA.
    pub fn generate(
        registry: Arc<Registry>,
        kems: &[u16],
        sigs: &[u16],
        seed: &Seed,
    ) -> Result<(Self, TrustStore), CryptoError> {
        for &k in kems {
            registry.kem(k)?;
        }
        let built: Vec<Result<(Credential, TrustAnchor), CryptoError>> =
            Exec::default().map(sigs.to_vec(), |alg| {
                let root = registry.sig_keygen(alg, &root_seed(seed, alg))?;
                let leaf = registry.sig_keygen(alg, &leaf_seed(seed, alg))?;
                let certificate = cert_issue(&registry, &root, DEFAULT_SUBJECT, &leaf)?;
                Ok((
                    Credential {
                        keypair: leaf,
                        encoded_certificate: certificate.encode(),
                        certificate,
                    },
                    TrustAnchor {
                        alg,
                        public_key: root.public_key,
                    },
                ))
            });
        let mut credentials = BTreeMap::new();
        let mut anchors = Vec::new();
        for b in built {
            let (cred, anchor) = b?;
            credentials.insert(anchor.alg, cred);
            anchors.push(anchor);
        }
        let identity = Self {
            registry,
            kems: kems.to_vec(),
            credentials,
        };
        Ok((identity, TrustStore::new(anchors)))
    }

    /// Root public keys that [`ServerIdentity::generate`] would produce for
    /// the same seed.
    pub fn trust_store_for(
        registry: &Registry,
        sigs: &[u16],
        seed: &Seed,
    ) -> Result<TrustStore, CryptoError> {
        let anchors = Exec::default().map(sigs.to_vec(), |alg| {
            registry
                .sig_keygen(alg, &root_seed(seed, alg))
                .map(|root| TrustAnchor {
                    alg,
                    public_key: root.public_key,
                })
        });
        anchors
            .into_iter()
            .collect::<Result<_, _>>()
            .map(TrustStore::new)
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn supports_kem(&self, code: u16) -> bool {
        self.kems.contains(&code)
    }

    pub fn credential(&self, sig_alg: u16) -> Option<&Credential> {
        self.credentials.get(&sig_alg)
    }

    pub fn sig_algs(&self) -> impl Iterator<Item = u16> + '_ {
        self.credentials.keys().copied()
    }

    pub fn kem_algs(&self) -> &[u16] {
        &self.kems
    }
}

/// Server state awaiting the client's Finished.
#[derive(Clone, Debug)]
pub struct ServerPending {
    pub keys: SessionKeys,
    transcript_hash: [u8; 32],
    pub times: PhaseTimes,
}

/// Deliberate server-side faults for exercising the key-confirmation path.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaultInjection {
    /// XOR `mask` into ciphertext byte `index` after encapsulation but
    /// before signing, so the signature still covers what is sent.
    pub ciphertext_xor: Option<(usize, u8)>,
}

pub fn server_respond(
    identity: &ServerIdentity,
    ch: &ClientHello,
    seed: &Seed,
) -> Result<(ServerHello, ServerPending), Alert> {
    server_respond_with_faults(identity, ch, seed, FaultInjection::default())
}

pub fn server_respond_with_faults(
    identity: &ServerIdentity,
    ch: &ClientHello,
    seed: &Seed,
    faults: FaultInjection,
) -> Result<(ServerHello, ServerPending), Alert> {
    let registry = &identity.registry;
    if !identity.supports_kem(ch.kem_alg) {
        return Err(Alert::new(
            AlertCode::UnsupportedAlgorithm,
            format!("KEM 0x{:04x}", ch.kem_alg),
        ));
    }
    let kem_meta = registry
        .metadata(ch.kem_alg)
        .map_err(|e| Alert::new(AlertCode::UnsupportedAlgorithm, e.to_string()))?;
    if kem_meta.id.kind != AlgorithmKind::Kem || ch.kem_public_key.len() != kem_meta.pk_len {
        return Err(Alert::new(AlertCode::DecodeError, "KEM public key length"));
    }
    let (chosen_sig, cred) = ch
        .sig_algs
        .iter()
        .find_map(|s| identity.credential(*s).map(|c| (*s, c)))
        .ok_or_else(|| {
            Alert::new(
                AlertCode::UnsupportedAlgorithm,
                "no mutually supported signature algorithm",
            )
        })?;

    let mut times = PhaseTimes::default();
    let t = Instant::now();
    let (mut ct, ss) = registry
        .kem_encap(ch.kem_alg, &ch.kem_public_key, &derive_seed(seed, b"encap"))
        .map_err(|e| Alert::new(AlertCode::DecodeError, e.to_string()))?;
    times.kem_ns = elapsed_ns(t);
    if let Some((index, mask)) = faults.ciphertext_xor {
        let i = index % ct.len();
        ct[i] ^= mask;
    }

    let mut sh = ServerHello {
        version: PROTOCOL_VERSION,
        server_random: derive_seed(seed, b"server random"),
        chosen_kem: ch.kem_alg,
        chosen_sig,
        certificate: cred.encoded_certificate.clone(),
        kem_ciphertext: ct,
        signature: Vec::new(),
    };
    let ch_payload = ch.encode_payload();
    let t = Instant::now();
    let th1 = transcript_hash(&ch_payload, &sh.encode_signed_prefix());
    // Signing failures (an exhausted stateful key) have no dedicated alert.
    sh.signature = registry
        .sig_sign(chosen_sig, &cred.keypair.secret_key, &th1)
        .map_err(|e| {
            Alert::new(
                AlertCode::UnsupportedAlgorithm,
                format!("signing failed: {e}"),
            )
        })?;
    times.sig_ns = elapsed_ns(t);

    let t = Instant::now();
    let th2 = transcript_hash(&ch_payload, &sh.encode_payload());
    let keys = key_schedule(&ss, &th2);
    times.kdf_ns = elapsed_ns(t);
    Ok((
        sh,
        ServerPending {
            keys,
            transcript_hash: th2,
            times,
        },
    ))
}

pub fn server_process_finished(pending: &ServerPending, finished: &Finished) -> Result<(), Alert> {
    let expected = finished_mac(&pending.keys.client_finished_key, &pending.transcript_hash);
    if ct_eq(&expected, &finished.mac) {
        Ok(())
    } else {
        Err(Alert::new(AlertCode::BadFinished, "Finished MAC mismatch"))
    }
}
