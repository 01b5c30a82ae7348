use std::collections::HashSet;

use pqtls::mlkem::*;
use rand::{Rng, SeedableRng};

#[test]
fn pke_roundtrip_ten_thousand() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(77);
    for _ in 0..10_000 {
        let (pk, sk) = pke_keygen(&rng.gen());
        let m: [u8; 32] = rng.gen();
        let ct = pke_encrypt(&pk, &m, &rng.gen()).unwrap();
        assert_eq!(ct.len(), 768);
        assert_eq!(pke_decrypt(&sk, &ct).unwrap(), m);
    }
}

#[test]
fn distinct_corruptions_give_distinct_rejections() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(78);
    let (pk, sk) = kem512_keygen(&rng.gen());
    let (ct, ss) = kem512_encap(&pk, &rng.gen()).unwrap();
    let mut seen = HashSet::new();
    for bit in 0..100 {
        let mut bad = ct.clone();
        let pos = bit * 61 % (768 * 8);
        bad[pos / 8] ^= 1 << (pos % 8);
        let rejected = kem512_decap(&sk, &bad).unwrap();
        assert_ne!(rejected, ss);
        assert!(seen.insert(rejected), "two corruptions collided");
    }
}

#[test]
fn ntt_multiplication_matches_schoolbook() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(79);
    let random = |rng: &mut rand::rngs::StdRng| {
        Polynomial::from_coeffs(
            std::array::from_fn(|_| rng.gen_range(0..3329)),
            Domain::Normal,
        )
    };
    for _ in 0..50 {
        let (a, b) = (random(&mut rng), random(&mut rng));
        let mut expect = [0i64; 256];
        for i in 0..256 {
            for j in 0..256 {
                let t = a.coeffs()[i] as i64 * b.coeffs()[j] as i64;
                if i + j < 256 {
                    expect[i + j] += t;
                } else {
                    expect[i + j - 256] -= t;
                }
            }
        }
        let expect: [u16; 256] = expect.map(|c| c.rem_euclid(3329) as u16);
        let got = a
            .ntt()
            .unwrap()
            .pointwise_mul(&b.ntt().unwrap())
            .unwrap()
            .inv_ntt()
            .unwrap();
        assert_eq!(got.coeffs(), &expect);
    }
}
