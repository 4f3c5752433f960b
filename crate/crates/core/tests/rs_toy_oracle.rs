//! RS(15, 9) over GF(16) checked exhaustively against an independent
//! codeword-membership oracle.

use artqr::gf::GaloisField;
use artqr::rs::ReedSolomon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 15;
const K: usize = 9;
const EC: usize = N - K;

/// Carry-less multiply reduced by x⁴ + x + 1.
fn mul16(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 == 1 {
            p ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x10 != 0 {
            a ^= 0x13;
        }
    }
    p
}

fn pow16(a: u8, e: usize) -> u8 {
    (0..e).fold(1, |acc, _| mul16(acc, a))
}

/// Codeword iff c(α^i) = 0 for i in 0..EC, coefficients highest degree first.
fn is_codeword(c: &[u8]) -> bool {
    (0..EC).all(|i| {
        let x = pow16(2, i);
        c.iter().fold(0u8, |acc, &v| mul16(acc, x) ^ v) == 0
    })
}

fn distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn codeword(rs: &ReedSolomon, data: &[u8]) -> Vec<u8> {
    let mut c = data.to_vec();
    c.extend(rs.encode(data));
    c
}

#[test]
fn encoder_output_satisfies_oracle() {
    let f = GaloisField::gf16();
    let rs = ReedSolomon::new(&f, EC);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..2000 {
        let data: Vec<u8> = (0..K).map(|_| rng.gen_range(0..16)).collect();
        assert!(is_codeword(&codeword(&rs, &data)));
    }
}

#[test]
fn all_patterns_up_to_two_errors_are_corrected() {
    let f = GaloisField::gf16();
    let rs = ReedSolomon::new(&f, EC);
    for data in [[0u8; K], [15; K], [1, 2, 3, 4, 5, 6, 7, 8, 9]] {
        let c = codeword(&rs, &data);
        for p in 0..N {
            for e in 1..16u8 {
                let mut r = c.clone();
                r[p] ^= e;
                assert_eq!(rs.decode(&r).unwrap(), (data.to_vec(), 1));
                for q in p + 1..N {
                    for e2 in 1..16u8 {
                        let mut r2 = r.clone();
                        r2[q] ^= e2;
                        assert_eq!(rs.decode(&r2).unwrap(), (data.to_vec(), 2));
                    }
                }
            }
        }
    }
}

#[test]
fn all_three_error_patterns_are_corrected() {
    let f = GaloisField::gf16();
    let rs = ReedSolomon::new(&f, EC);
    let data = [9u8, 0, 4, 15, 3, 3, 12, 1, 7];
    let c = codeword(&rs, &data);
    let mut count = 0;
    for p in 0..N {
        for q in p + 1..N {
            for s in q + 1..N {
                for e1 in 1..16u8 {
                    for e2 in 1..16u8 {
                        for e3 in 1..16u8 {
                            let mut r = c.clone();
                            r[p] ^= e1;
                            r[q] ^= e2;
                            r[s] ^= e3;
                            assert_eq!(rs.decode(&r).unwrap(), (data.to_vec(), 3));
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(count, 455 * 3375);
}

#[test]
fn beyond_capacity_never_returns_a_non_codeword() {
    let f = GaloisField::gf16();
    let rs = ReedSolomon::new(&f, EC);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut failures, mut miscorrections) = (0, 0);
    for _ in 0..100_000 {
        let data: Vec<u8> = (0..K).map(|_| rng.gen_range(0..16)).collect();
        let c = codeword(&rs, &data);
        let mut r = c.clone();
        let mut hit = [false; N];
        let mut placed = 0;
        while placed < 4 {
            let p = rng.gen_range(0..N);
            if !hit[p] {
                hit[p] = true;
                r[p] ^= rng.gen_range(1..16);
                placed += 1;
            }
        }
        let mut work = r.clone();
        match rs.decode_in_place(&mut work) {
            Ok(n) => {
                assert!(is_codeword(&work));
                assert_eq!(distance(&work, &r), n);
                assert!(n <= EC / 2);
                assert_ne!(work, c);
                miscorrections += 1;
            }
            Err(_) => failures += 1,
        }
    }
    assert_eq!(failures + miscorrections, 100_000);
    assert!(failures > miscorrections);
}
