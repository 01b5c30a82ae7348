//! Single-tree stateful Merkle signature over WOTS leaves.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use super::wots::{wots_recover_pk, wots_sign_counted, LeafKey, Node, LEN, N};
use crate::hash::sha3_256;
use crate::par::Exec;
use crate::suite::CryptoError;

pub const DEFAULT_HEIGHT: u32 = 10;
pub const MAX_HEIGHT: u32 = 20;

/// Byte length of a signature for a tree of height `h`.
pub const fn signature_len(h: u32) -> usize {
    4 + LEN * N + h as usize * N
}

const _: () = assert!(signature_len(DEFAULT_HEIGHT) == 2468);

fn node_hash(level: u32, index: u32, left: &Node, right: &Node) -> Node {
    sha3_256(&[
        b"xmss node",
        &level.to_be_bytes(),
        &index.to_be_bytes(),
        left,
        right,
    ])
}

fn message_digest(root: &Node, leaf: u32, message: &[u8]) -> Node {
    sha3_256(&[b"xmss msg", root, &leaf.to_be_bytes(), message])
}

/// Signing state. The leaf counter is claimed with a compare-and-swap before
/// any signing work, so concurrent signers never share a leaf.
#[derive(Debug)]
pub struct MerkleState {
    seed: [u8; 32],
    height: u32,
    next_leaf: AtomicU32,
    /// levels[0] are leaf public keys, levels[height] = [root].
    levels: Vec<Vec<Node>>,
    keygen_hash_calls: u64,
    sign_hash_calls: AtomicU64,
    signatures: AtomicU64,
}

impl MerkleState {
    pub fn root(&self) -> Node {
        self.levels[self.height as usize][0]
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn capacity(&self) -> u32 {
        1 << self.height
    }

    /// Next unused leaf; equals the number of signatures issued.
    pub fn leaf_index(&self) -> u32 {
        self.next_leaf.load(Ordering::Acquire)
    }

    pub fn leaf_pk(&self, leaf: u32) -> Node {
        self.levels[0][leaf as usize]
    }

    pub fn keygen_hash_calls(&self) -> u64 {
        self.keygen_hash_calls
    }

    /// Hash calls spent inside [`xmss_sign`] since keygen.
    pub fn sign_hash_calls(&self) -> u64 {
        self.sign_hash_calls.load(Ordering::Relaxed)
    }

    pub fn signatures(&self) -> u64 {
        self.signatures.load(Ordering::Relaxed)
    }

    fn claim_leaf(&self) -> Result<u32, CryptoError> {
        let cap = self.capacity();
        self.next_leaf
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |i| {
                (i < cap).then_some(i + 1)
            })
            .map_err(|_| CryptoError::StateExhausted)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashSigSignature {
    pub leaf_index: u32,
    pub chains: Vec<Node>,
    pub auth_path: Vec<Node>,
}

impl HashSigSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(signature_len(self.auth_path.len() as u32));
        out.extend_from_slice(&self.leaf_index.to_be_bytes());
        for n in self.chains.iter().chain(&self.auth_path) {
            out.extend_from_slice(n);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], height: u32) -> Result<Self, CryptoError> {
        crate::suite::check_len("signature", signature_len(height), bytes.len())?;
        let leaf_index = u32::from_be_bytes(bytes[..4].try_into().unwrap());
        let mut nodes = bytes[4..]
            .chunks_exact(N)
            .map(|c| Node::try_from(c).unwrap());
        let chains = nodes.by_ref().take(LEN).collect();
        let auth_path = nodes.collect();
        Ok(Self {
            leaf_index,
            chains,
            auth_path,
        })
    }
}

pub fn xmss_keygen(seed: &[u8; 32], height: u32) -> (Node, MerkleState) {
    xmss_keygen_with(seed, height, Exec::default())
}

/// Builds the whole tree; leaf generation is data-parallel under `exec`.
pub fn xmss_keygen_with(seed: &[u8; 32], height: u32, exec: Exec) -> (Node, MerkleState) {
    assert!(
        (1..=MAX_HEIGHT).contains(&height),
        "tree height must be in 1..={MAX_HEIGHT}"
    );
    let leaves: Vec<(Node, u64)> = exec.map_range(1 << height, |leaf| {
        let mut calls = 0;
        let pk = LeafKey {
            seed,
            leaf: leaf as u32,
        }
        .leaf_pk(&mut calls);
        (pk, calls)
    });
    let mut calls: u64 = leaves.iter().map(|(_, c)| c).sum();
    let mut levels = vec![leaves.into_iter().map(|(pk, _)| pk).collect::<Vec<_>>()];
    for level in 1..=height {
        let below = &levels[level as usize - 1];
        let next: Vec<Node> = below
            .chunks_exact(2)
            .enumerate()
            .map(|(i, pair)| node_hash(level, i as u32, &pair[0], &pair[1]))
            .collect();
        calls += next.len() as u64;
        levels.push(next);
    }
    let state = MerkleState {
        seed: *seed,
        height,
        next_leaf: AtomicU32::new(0),
        levels,
        keygen_hash_calls: calls,
        sign_hash_calls: AtomicU64::new(0),
        signatures: AtomicU64::new(0),
    };
    (state.root(), state)
}

/// Signs with the next unused leaf. The only state-mutating operation.
pub fn xmss_sign(state: &MerkleState, message: &[u8]) -> Result<HashSigSignature, CryptoError> {
    let leaf = state.claim_leaf()?;
    let mut calls = 1;
    let digest = message_digest(&state.root(), leaf, message);
    let key = LeafKey {
        seed: &state.seed,
        leaf,
    };
    let chains = wots_sign_counted(&key, &digest, &mut calls);
    let auth_path = (0..state.height)
        .map(|level| state.levels[level as usize][((leaf >> level) ^ 1) as usize])
        .collect();
    state.sign_hash_calls.fetch_add(calls, Ordering::Relaxed);
    state.signatures.fetch_add(1, Ordering::Relaxed);
    Ok(HashSigSignature {
        leaf_index: leaf,
        chains,
        auth_path,
    })
}

pub fn xmss_verify(root: &Node, message: &[u8], sig: &HashSigSignature) -> bool {
    let height = sig.auth_path.len() as u32;
    if sig.chains.len() != LEN
        || height == 0
        || height > MAX_HEIGHT
        || sig.leaf_index >= 1 << height
    {
        return false;
    }
    let digest = message_digest(root, sig.leaf_index, message);
    let mut node = wots_recover_pk(sig.leaf_index, &digest, &sig.chains);
    let mut index = sig.leaf_index;
    for (level, sibling) in sig.auth_path.iter().enumerate() {
        let parent = index >> 1;
        node = if index & 1 == 0 {
            node_hash(level as u32 + 1, parent, &node, sibling)
        } else {
            node_hash(level as u32 + 1, parent, sibling, &node)
        };
        index = parent;
    }
    crate::hash::ct_eq(&node, root)
}
