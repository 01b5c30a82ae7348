use std::cell::Cell;

use sha2::compress256;
use sha2::digest::generic_array::GenericArray;

const SHA256_IV: [u32; 8] = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
];

thread_local! {
    static COMPRESSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Runs exactly `units` chained SHA-256 compressions seeded by `input`.
///
/// Block `i` is `input ‖ state_{i-1}`; the final state is returned so the
/// work cannot be elided.
pub fn burn(units: u64, input: &[u8; 32]) -> [u8; 32] {
    let mut state = SHA256_IV;
    let mut block = [0u8; 64];
    block[..32].copy_from_slice(input);
    for _ in 0..units {
        compress256(
            &mut state,
            std::slice::from_ref(GenericArray::from_slice(&block)),
        );
        for (chunk, word) in block[32..].chunks_exact_mut(4).zip(state) {
            chunk.copy_from_slice(&word.to_be_bytes());
        }
    }
    COMPRESSIONS.with(|c| c.set(c.get() + units));
    let mut out = [0u8; 32];
    for (chunk, word) in out.chunks_exact_mut(4).zip(state) {
        chunk.copy_from_slice(&word.to_be_bytes());
    }
    out
}

/// Total compressions performed by [`burn`] on the current thread.
pub fn compressions_on_this_thread() -> u64 {
    COMPRESSIONS.with(Cell::get)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    #[test]
    fn zero_units_is_the_iv() {
        let out = burn(0, &[7; 32]);
        assert_eq!(&out[..4], &0x6a09e667u32.to_be_bytes());
    }

    #[test]
    fn performs_exactly_the_requested_compressions() {
        for units in [0u64, 1, 17, 10_000] {
            let before = compressions_on_this_thread();
            burn(units, &[1; 32]);
            assert_eq!(compressions_on_this_thread() - before, units);
        }
    }

    #[test]
    fn chaining_is_consistent() {
        // burn(a+b) continues from burn(a): the state after a steps is
        // exactly what the next block sees.
        assert_ne!(burn(2, &[0; 32]), burn(1, &[0; 32]));
        assert_eq!(burn(5, &[3; 32]), burn(5, &[3; 32]));
    }

    #[test]
    fn wall_clock_is_monotone_in_units() {
        let median = |units: u64| {
            let mut samples: Vec<u128> = (0..20)
                .map(|_| {
                    let t = Instant::now();
                    std::hint::black_box(burn(units, &[9; 32]));
                    t.elapsed().as_nanos()
                })
                .collect();
            samples.sort_unstable();
            samples[10]
        };
        let (a, b, c) = (median(0), median(10_000), median(1_000_000));
        assert!(a <= b && b <= c, "medians {a} {b} {c}");
    }
}
