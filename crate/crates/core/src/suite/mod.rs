//! Algorithm identities, size/cost metadata, the KEM and signature provider
//! contracts, and the registry that maps wire codes to providers.

mod cost;
mod mock;
mod registry;

use std::any::Any;
use std::fmt;
use std::sync::Arc;

pub use cost::{burn, compressions_on_this_thread};
pub use mock::{MockKem, MockSig};
pub use registry::{Registry, RegistryEntry};

/// Wire codes of the built-in algorithms.
pub mod codes {
    pub const KEM_TOY_MLKEM512: u16 = 0x0101;
    pub const KEM_MOCK_KYBER512: u16 = 0x0102;
    pub const KEM_MOCK_KYBER768: u16 = 0x0103;
    pub const KEM_MOCK_X25519: u16 = 0x0110;

    pub const SIG_TOY_WOTS_MERKLE: u16 = 0x0201;
    pub const SIG_MOCK_FALCON512: u16 = 0x0202;
    pub const SIG_MOCK_DILITHIUM2: u16 = 0x0203;
    pub const SIG_MOCK_SPHINCS128S: u16 = 0x0204;
    pub const SIG_MOCK_RSA2048: u16 = 0x0210;
}

/// Length of every KEM shared secret.
pub const SHARED_SECRET_LEN: usize = 32;

pub type SharedSecret = [u8; SHARED_SECRET_LEN];
pub type Seed = [u8; 32];

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("unknown algorithm 0x{0:04x}")]
    UnknownAlgorithm(u16),
    #[error("unknown algorithm name {0:?}")]
    UnknownName(String),
    #[error("algorithm 0x{code:04x} is not a {expected}")]
    WrongKind { code: u16, expected: AlgorithmKind },
    #[error("{field} must be {expected} bytes, got {actual}")]
    WrongLength {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("signing state exhausted")]
    StateExhausted,
    #[error("stateful scheme requires a secret key produced by keygen")]
    MissingSigningState,
    #[error("chain overflow: start {start} + steps {steps} exceeds w-1")]
    ChainOverflow { start: usize, steps: usize },
    #[error("polynomial is in the wrong domain")]
    DomainMismatch,
    #[error("duplicate algorithm registration: {0}")]
    Duplicate(String),
    #[error("provider violated its contract: {0}")]
    ProviderContract(String),
}

pub(crate) fn check_len(
    field: &'static str,
    expected: usize,
    actual: usize,
) -> Result<(), CryptoError> {
    if expected == actual {
        Ok(())
    } else {
        Err(CryptoError::WrongLength {
            field,
            expected,
            actual,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    Kem,
    Sig,
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::Kem => "KEM",
            AlgorithmKind::Sig => "SIG",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgorithmId {
    pub kind: AlgorithmKind,
    pub name: String,
    pub wire_code: u16,
}

impl AlgorithmId {
    pub fn new(kind: AlgorithmKind, name: impl Into<String>, wire_code: u16) -> Self {
        Self {
            kind,
            name: name.into(),
            wire_code,
        }
    }

    /// Name without the `kem.`/`sig.` prefix, used in report labels.
    pub fn short_name(&self) -> &str {
        self.name
            .strip_prefix("kem.")
            .or_else(|| self.name.strip_prefix("sig."))
            .unwrap_or(&self.name)
    }
}

/// Synthetic per-operation cost in hash compressions.
///
/// `op` is encapsulation (KEM) or signing (SIG); `verify` is decapsulation
/// (KEM) or verification (SIG).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CostUnits {
    pub keygen: u64,
    pub op: u64,
    pub verify: u64,
}

impl CostUnits {
    pub const fn new(keygen: u64, op: u64, verify: u64) -> Self {
        Self { keygen, op, verify }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchemeMetadata {
    pub id: AlgorithmId,
    pub pk_len: usize,
    pub sk_len: usize,
    /// Ciphertext length for a KEM, signature length for a SIG.
    pub out_len: usize,
    /// Shared-secret length; zero for signature schemes.
    pub ss_len: usize,
    pub cost: CostUnits,
}

impl SchemeMetadata {
    pub fn kem(
        id: AlgorithmId,
        pk_len: usize,
        sk_len: usize,
        ct_len: usize,
        cost: CostUnits,
    ) -> Self {
        debug_assert_eq!(id.kind, AlgorithmKind::Kem);
        Self {
            id,
            pk_len,
            sk_len,
            out_len: ct_len,
            ss_len: SHARED_SECRET_LEN,
            cost,
        }
    }

    pub fn sig(
        id: AlgorithmId,
        pk_len: usize,
        sk_len: usize,
        sig_len: usize,
        cost: CostUnits,
    ) -> Self {
        debug_assert_eq!(id.kind, AlgorithmKind::Sig);
        Self {
            id,
            pk_len,
            sk_len,
            out_len: sig_len,
            ss_len: 0,
            cost,
        }
    }

    pub fn code(&self) -> u16 {
        self.id.wire_code
    }

    pub fn validate(&self) -> Result<(), CryptoError> {
        let bad = |what: &str| {
            Err(CryptoError::ProviderContract(format!(
                "{}: {what}",
                self.id.name
            )))
        };
        if self.pk_len == 0 || self.sk_len == 0 || self.out_len == 0 {
            return bad("all lengths must be positive");
        }
        match self.id.kind {
            AlgorithmKind::Kem if self.ss_len != SHARED_SECRET_LEN => {
                bad("shared secret must be 32 bytes")
            }
            AlgorithmKind::Sig if self.ss_len != 0 => bad("signature scheme has no shared secret"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KemKeyPair {
    pub alg: u16,
    pub public_key: Vec<u8>,
    pub secret_key: Vec<u8>,
}

/// Signing key bytes plus, for stateful schemes, the shared signing state.
///
/// Clones share the state, so a cloned key can never reuse a one-time leaf.
#[derive(Clone)]
pub struct SigSecretKey {
    bytes: Vec<u8>,
    state: Option<Arc<dyn Any + Send + Sync>>,
}

impl SigSecretKey {
    pub fn stateless(bytes: Vec<u8>) -> Self {
        Self { bytes, state: None }
    }

    pub fn stateful<S: Any + Send + Sync>(bytes: Vec<u8>, state: Arc<S>) -> Self {
        Self {
            bytes,
            state: Some(state),
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn state<S: Any + Send + Sync>(&self) -> Option<&S> {
        self.state.as_deref().and_then(|s| s.downcast_ref::<S>())
    }
}

impl fmt::Debug for SigSecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigSecretKey")
            .field("len", &self.bytes.len())
            .field("stateful", &self.state.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct SigKeyPair {
    pub alg: u16,
    pub public_key: Vec<u8>,
    pub secret_key: SigSecretKey,
}

/// Key encapsulation provider. Inputs are length-checked by the [`Registry`]
/// before they reach the provider.
pub trait KemProvider: Send + Sync {
    fn metadata(&self) -> &SchemeMetadata;
    /// Returns `(public_key, secret_key)`.
    fn keygen(&self, seed: &Seed) -> (Vec<u8>, Vec<u8>);
    fn encap(&self, pk: &[u8], randomness: &Seed) -> (Vec<u8>, SharedSecret);
    /// Must return a deterministic value for any correctly sized ciphertext.
    fn decap(&self, sk: &[u8], ct: &[u8]) -> SharedSecret;
}

pub trait SigProvider: Send + Sync {
    fn metadata(&self) -> &SchemeMetadata;
    fn keygen(&self, seed: &Seed) -> (Vec<u8>, SigSecretKey);
    fn sign(&self, sk: &SigSecretKey, message: &[u8]) -> Result<Vec<u8>, CryptoError>;
    /// `false` on any content mismatch; never an error.
    fn verify(&self, pk: &[u8], message: &[u8], signature: &[u8]) -> bool;
}
