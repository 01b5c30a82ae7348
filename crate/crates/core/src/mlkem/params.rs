//! ML-KEM-512-shaped parameter set.

pub const N: usize = 256;
pub const Q: u32 = 3329;
pub const K: usize = 2;
pub const ETA1: usize = 3;
pub const ETA2: usize = 2;
pub const DU: u32 = 10;
pub const DV: u32 = 4;

pub const POLY_BYTES: usize = 12 * N / 8;
pub const PKE_SK_LEN: usize = K * POLY_BYTES;
pub const PK_LEN: usize = K * POLY_BYTES + 32;
pub const CT_LEN: usize = (DU as usize * K * N + DV as usize * N) / 8;
pub const SK_LEN: usize = PKE_SK_LEN + PK_LEN + 32 + 32;

const _: () = assert!(PK_LEN == 800);
const _: () = assert!(CT_LEN == 768);
const _: () = assert!(SK_LEN == 1632);
