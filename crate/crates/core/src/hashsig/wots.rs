//! Winternitz one-time signatures over SHA3-256 hash chains (w = 16).

use crate::hash::sha3_256;
use crate::suite::CryptoError;

pub const N: usize = 32;
pub const W: usize = 16;
pub const LOG_W: usize = 4;
pub const LEN1: usize = 64;
pub const LEN2: usize = 3;
pub const LEN: usize = LEN1 + LEN2;

// len1 = ceil(8n / log2 w); len2 = floor(log2(len1·(w−1)) / log2 w) + 1
const _: () = assert!(LEN1 == (8 * N).div_ceil(LOG_W));
const _: () = assert!(LEN2 == (LEN1 * (W - 1)).ilog2() as usize / LOG_W + 1);

pub type Node = [u8; N];

/// Position of a hash chain inside the key: (leaf, chain index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainAddress {
    pub leaf: u32,
    pub chain: u16,
}

impl ChainAddress {
    fn bytes(self) -> [u8; 6] {
        let mut b = [0u8; 6];
        b[..4].copy_from_slice(&self.leaf.to_be_bytes());
        b[4..].copy_from_slice(&self.chain.to_be_bytes());
        b
    }
}

/// Advances `x` from position `start` by `steps` applications of
/// F(addr ‖ position ‖ value).
pub fn chain(
    x: &Node,
    start: usize,
    steps: usize,
    addr: ChainAddress,
) -> Result<Node, CryptoError> {
    let mut calls = 0;
    chain_counted(x, start, steps, addr, &mut calls)
}

pub(crate) fn chain_counted(
    x: &Node,
    start: usize,
    steps: usize,
    addr: ChainAddress,
    calls: &mut u64,
) -> Result<Node, CryptoError> {
    if start + steps > W - 1 {
        return Err(CryptoError::ChainOverflow { start, steps });
    }
    let a = addr.bytes();
    let mut value = *x;
    for pos in start..start + steps {
        value = sha3_256(&[&a, &[pos as u8], &value]);
    }
    *calls += steps as u64;
    Ok(value)
}

/// Base-16 digits of the digest followed by the 3-digit big-endian checksum
/// Σ(15 − m_i).
pub fn message_digits(digest: &Node) -> [u8; LEN] {
    let mut digits = [0u8; LEN];
    for (i, byte) in digest.iter().enumerate() {
        digits[2 * i] = byte >> 4;
        digits[2 * i + 1] = byte & 0x0f;
    }
    let csum: u32 = digits[..LEN1]
        .iter()
        .map(|&m| (W as u32 - 1) - m as u32)
        .sum();
    digits[LEN1] = ((csum >> 8) & 0xf) as u8;
    digits[LEN1 + 1] = ((csum >> 4) & 0xf) as u8;
    digits[LEN1 + 2] = (csum & 0xf) as u8;
    digits
}

/// One-time key of a single leaf; chain secrets are PRF(seed, leaf ‖ chain).
#[derive(Clone, Copy)]
pub struct LeafKey<'a> {
    pub seed: &'a [u8; 32],
    pub leaf: u32,
}

impl LeafKey<'_> {
    fn addr(&self, chain: usize) -> ChainAddress {
        ChainAddress {
            leaf: self.leaf,
            chain: chain as u16,
        }
    }

    pub(crate) fn secret_counted(&self, chain: usize, calls: &mut u64) -> Node {
        *calls += 1;
        sha3_256(&[
            b"wots sk",
            self.seed,
            &self.leaf.to_be_bytes(),
            &(chain as u16).to_be_bytes(),
        ])
    }

    pub fn secret(&self, chain: usize) -> Node {
        self.secret_counted(chain, &mut 0)
    }

    /// The fully advanced chain ends.
    pub fn public_chains(&self, calls: &mut u64) -> Vec<Node> {
        (0..LEN)
            .map(|i| {
                let sk = self.secret_counted(i, calls);
                chain_counted(&sk, 0, W - 1, self.addr(i), calls).expect("full chain fits")
            })
            .collect()
    }

    pub fn leaf_pk(&self, calls: &mut u64) -> Node {
        compress_leaf(self.leaf, &self.public_chains(calls), calls)
    }
}

pub(crate) fn compress_leaf(leaf: u32, chain_ends: &[Node], calls: &mut u64) -> Node {
    *calls += 1;
    let mut parts: Vec<&[u8]> = Vec::with_capacity(LEN + 2);
    let idx = leaf.to_be_bytes();
    parts.push(b"wots pk");
    parts.push(&idx);
    parts.extend(chain_ends.iter().map(|c| c.as_slice()));
    sha3_256(&parts)
}

pub fn wots_sign(key: &LeafKey<'_>, digest: &Node) -> Vec<Node> {
    wots_sign_counted(key, digest, &mut 0)
}

pub(crate) fn wots_sign_counted(key: &LeafKey<'_>, digest: &Node, calls: &mut u64) -> Vec<Node> {
    message_digits(digest)
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let sk = key.secret_counted(i, calls);
            chain_counted(&sk, 0, m as usize, key.addr(i), calls).expect("digit < w")
        })
        .collect()
}

/// Completes every chain to w−1 and compresses the ends into a candidate
/// leaf public key.
pub fn wots_recover_pk(leaf: u32, digest: &Node, chains: &[Node]) -> Node {
    let mut calls = 0;
    let ends: Vec<Node> = message_digits(digest)
        .iter()
        .zip(chains)
        .enumerate()
        .map(|(i, (&m, c))| {
            let addr = ChainAddress {
                leaf,
                chain: i as u16,
            };
            chain_counted(c, m as usize, W - 1 - m as usize, addr, &mut calls).expect("digit < w")
        })
        .collect();
    compress_leaf(leaf, &ends, &mut calls)
}
