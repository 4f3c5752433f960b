//! Reed–Solomon coding over GF(2^k) with consecutive generator roots
//! α^0 … α^(n−1), the convention used by QR codes.
//!
//! Codewords are stored highest-degree coefficient first: byte 0 of a block is
//! the coefficient of x^(N−1). Decoding follows the usual chain of syndrome
//! computation, Berlekamp–Massey for the error locator, Chien search for its
//! roots and Forney's formula for the magnitudes.

use crate::error::{Error, Result};
use crate::gf::GaloisField;

/// Encoder/decoder for a fixed number of parity symbols.
#[derive(Debug, Clone)]
pub struct ReedSolomon<'f> {
    field: &'f GaloisField,
    ec_len: usize,
    /// Generator polynomial, monic, highest degree first (length ec_len + 1).
    generator: Vec<u8>,
}

impl<'f> ReedSolomon<'f> {
    pub fn new(field: &'f GaloisField, ec_len: usize) -> Self {
        assert!(ec_len >= 1, "need at least one parity symbol");
        assert!(ec_len < field.order(), "too many parity symbols for field");
        let mut generator = vec![1u8];
        for i in 0..ec_len {
            // multiply by (x − α^i)
            let root = field.exp(i);
            let mut next = vec![0u8; generator.len() + 1];
            for (j, &c) in generator.iter().enumerate() {
                next[j] ^= c;
                next[j + 1] ^= field.mul(c, root);
            }
            generator = next;
        }
        Self {
            field,
            ec_len,
            generator,
        }
    }

    pub fn ec_len(&self) -> usize {
        self.ec_len
    }

    /// Maximum number of symbol errors the code corrects.
    pub fn capability(&self) -> usize {
        self.ec_len / 2
    }

    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    /// Parity symbols for `data` (remainder of data·x^n divided by g).
    pub fn encode(&self, data: &[u8]) -> Vec<u8> {
        let f = self.field;
        let mut rem = vec![0u8; self.ec_len];
        for &d in data {
            let factor = d ^ rem[0];
            rem.rotate_left(1);
            rem[self.ec_len - 1] = 0;
            if factor != 0 {
                for (r, &g) in rem.iter_mut().zip(&self.generator[1..]) {
                    *r ^= f.mul(g, factor);
                }
            }
        }
        rem
    }

    /// S_i = r(α^i) for i in 0..ec_len.
    pub fn syndromes(&self, block: &[u8]) -> Vec<u8> {
        (0..self.ec_len)
            .map(|i| self.field.eval_msb_first(block, self.field.exp(i)))
            .collect()
    }

    /// Corrects `block` (data followed by parity) in place and returns the
    /// number of symbols changed.
    pub fn decode_in_place(&self, block: &mut [u8]) -> Result<usize> {
        let n = block.len();
        if n <= self.ec_len || n > self.field.order() {
            return Err(Error::Uncorrectable("block length out of range"));
        }
        let synd = self.syndromes(block);
        if synd.iter().all(|&s| s == 0) {
            return Ok(0);
        }
        let f = self.field;

        let locator = self.berlekamp_massey(&synd);
        let degree = locator.len() - 1;
        if degree == 0 || 2 * degree > self.ec_len {
            return Err(Error::Uncorrectable("error locator degree exceeds capability"));
        }

        // Chien search over the valid (possibly shortened) positions.
        let mut positions = Vec::with_capacity(degree);
        for idx in 0..n {
            let power = n - 1 - idx;
            let x_inv = f.exp(f.order() - power % f.order());
            if f.eval_lsb_first(&locator, x_inv) == 0 {
                positions.push(idx);
            }
        }
        if positions.len() != degree {
            return Err(Error::Uncorrectable("error locator roots do not match its degree"));
        }

        // Ω(x) = S(x)·Λ(x) mod x^ec_len, lowest degree first.
        let mut omega = vec![0u8; self.ec_len];
        for (i, &s) in synd.iter().enumerate() {
            if s == 0 {
                continue;
            }
            for (j, &l) in locator.iter().enumerate() {
                if i + j < self.ec_len {
                    omega[i + j] ^= f.mul(s, l);
                }
            }
        }
        // Formal derivative keeps odd-degree terms only.
        let derivative: Vec<u8> = locator
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();

        for &idx in &positions {
            let power = n - 1 - idx;
            let x = f.exp(power);
            let x_inv = f.inv(x);
            let denom = f.eval_lsb_first(&derivative, x_inv);
            if denom == 0 {
                return Err(Error::Uncorrectable("repeated locator root"));
            }
            let magnitude = f.mul(x, f.div(f.eval_lsb_first(&omega, x_inv), denom));
            block[idx] ^= magnitude;
        }

        if self.syndromes(block).iter().any(|&s| s != 0) {
            return Err(Error::Uncorrectable("nonzero syndromes after correction"));
        }
        Ok(positions.len())
    }

    /// Decodes `block` and returns the corrected data symbols plus the
    /// number of corrected symbols.
    pub fn decode(&self, block: &[u8]) -> Result<(Vec<u8>, usize)> {
        let mut work = block.to_vec();
        let corrected = self.decode_in_place(&mut work)?;
        work.truncate(block.len() - self.ec_len);
        Ok((work, corrected))
    }

    /// Error locator Λ(x), lowest degree first, trailing zeros trimmed.
    fn berlekamp_massey(&self, synd: &[u8]) -> Vec<u8> {
        let f = self.field;
        let mut lambda = vec![1u8];
        let mut prev = vec![1u8];
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut prev_disc = 1u8;

        for step in 0..synd.len() {
            let mut disc = synd[step];
            for i in 1..=len.min(lambda.len() - 1) {
                disc ^= f.mul(lambda[i], synd[step - i]);
            }
            if disc == 0 {
                shift += 1;
                continue;
            }
            let scale = f.div(disc, prev_disc);
            let mut next = lambda.clone();
            if next.len() < prev.len() + shift {
                next.resize(prev.len() + shift, 0);
            }
            for (i, &p) in prev.iter().enumerate() {
                next[i + shift] ^= f.mul(scale, p);
            }
            if 2 * len <= step {
                prev = lambda;
                len = step + 1 - len;
                prev_disc = disc;
                shift = 1;
            } else {
                shift += 1;
            }
            lambda = next;
        }
        while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
            lambda.pop();
        }
        lambda
    }
}

/// Parity bytes for `data` in the QR field.
pub fn rs_encode(data: &[u8], ec_len: usize) -> Vec<u8> {
    ReedSolomon::new(GaloisField::qr(), ec_len).encode(data)
}

/// Corrects a QR-field block (data ‖ parity) and returns the payload bytes
/// with the number of corrected bytes.
pub fn rs_decode(frame: &[u8], ec_len: usize) -> Result<(Vec<u8>, usize)> {
    ReedSolomon::new(GaloisField::qr(), ec_len).decode(frame)
}
