//! Stateful hash-based signature: WOTS (w = 16) one-time keys under a
//! single Merkle tree, XMSS-shaped.

mod wots;
mod xmss;

use std::sync::Arc;

pub use wots::{
    chain, message_digits, wots_recover_pk, wots_sign, ChainAddress, LeafKey, Node, LEN, LEN1,
    LEN2, W,
};
pub use xmss::{
    signature_len, xmss_keygen, xmss_keygen_with, xmss_sign, xmss_verify, HashSigSignature,
    MerkleState, DEFAULT_HEIGHT, MAX_HEIGHT,
};

use crate::suite::{
    codes, AlgorithmId, AlgorithmKind, CostUnits, CryptoError, SchemeMetadata, Seed, SigProvider,
    SigSecretKey,
};

/// Registry adapter. Public key = Merkle root; secret key bytes = seed, with
/// the tree and leaf counter carried as shared state.
#[derive(Clone, Debug)]
pub struct ToyHashSig {
    meta: SchemeMetadata,
    height: u32,
}

impl ToyHashSig {
    pub fn new(cost: CostUnits) -> Self {
        Self::with_height(
            "sig.toy_wots_merkle",
            codes::SIG_TOY_WOTS_MERKLE,
            DEFAULT_HEIGHT,
            cost,
        )
    }

    pub fn with_height(name: &str, wire_code: u16, height: u32, cost: CostUnits) -> Self {
        let id = AlgorithmId::new(AlgorithmKind::Sig, name, wire_code);
        Self {
            meta: SchemeMetadata::sig(id, 32, 32, signature_len(height), cost),
            height,
        }
    }
}

impl SigProvider for ToyHashSig {
    fn metadata(&self) -> &SchemeMetadata {
        &self.meta
    }

    fn keygen(&self, seed: &Seed) -> (Vec<u8>, SigSecretKey) {
        let (root, state) = xmss_keygen(seed, self.height);
        (
            root.to_vec(),
            SigSecretKey::stateful(seed.to_vec(), Arc::new(state)),
        )
    }

    fn sign(&self, sk: &SigSecretKey, message: &[u8]) -> Result<Vec<u8>, CryptoError> {
        let state = sk
            .state::<MerkleState>()
            .ok_or(CryptoError::MissingSigningState)?;
        Ok(xmss_sign(state, message)?.to_bytes())
    }

    fn verify(&self, pk: &[u8], message: &[u8], signature: &[u8]) -> bool {
        let Ok(root) = Node::try_from(pk) else {
            return false;
        };
        match HashSigSignature::from_bytes(signature, self.height) {
            Ok(sig) => xmss_verify(&root, message, &sig),
            Err(_) => false,
        }
    }
}
