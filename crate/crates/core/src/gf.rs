//! Arithmetic in binary extension fields GF(2^k), k ≤ 8.
//!
//! QR codes use GF(256) with the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1
//! (0x11D) and generator α = 2. Smaller fields are supported so the
//! Reed–Solomon decoder can be exercised on toy codes where exhaustive search
//! is cheap.

use std::sync::LazyLock;

/// Log/antilog tables for GF(2^k).
#[derive(Debug, Clone)]
pub struct GaloisField {
    bits: u32,
    poly: u16,
    order: usize,
    exp: Vec<u8>,
    log: Vec<u8>,
}

static QR_FIELD: LazyLock<GaloisField> = LazyLock::new(|| GaloisField::new(8, 0x11D));

impl GaloisField {
    /// Builds the field for `bits`-bit symbols reduced modulo the primitive `poly`.
    ///
    /// Panics when `poly` is not primitive for the requested width, since the
    /// resulting tables would be meaningless.
    pub fn new(bits: u32, poly: u16) -> Self {
        assert!((2..=8).contains(&bits), "field width must be 2..=8 bits");
        let size = 1usize << bits;
        let order = size - 1;
        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u8; size];
        let mut x: u16 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            *e = x as u8;
            assert!(
                i == 0 || x != 1,
                "polynomial {poly:#x} is not primitive for GF(2^{bits})"
            );
            log[x as usize] = i as u8;
            x <<= 1;
            if x & (size as u16) != 0 {
                x ^= poly;
            }
        }
        assert_eq!(x, 1, "polynomial {poly:#x} is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Self {
            bits,
            poly,
            order,
            exp,
            log,
        }
    }

    /// The QR code field GF(256) / 0x11D.
    pub fn qr() -> &'static GaloisField {
        &QR_FIELD
    }

    /// GF(16) / x^4 + x + 1, used for toy codes.
    pub fn gf16() -> Self {
        Self::new(4, 0x13)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn primitive_poly(&self) -> u16 {
        self.poly
    }

    /// Multiplicative group order, 2^k − 1.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of field elements, 2^k.
    pub fn size(&self) -> usize {
        self.order + 1
    }

    /// α^e for any non-negative exponent.
    #[inline]
    pub fn exp(&self, e: usize) -> u8 {
        self.exp[e % self.order]
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, x: u8) -> usize {
        debug_assert!(x != 0, "log of zero");
        self.log[x as usize] as usize
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn div(&self, a: u8, b: u8) -> u8 {
        assert!(b != 0, "division by zero in GF(2^{})", self.bits);
        if a == 0 {
            0
        } else {
            let la = self.log[a as usize] as usize;
            let lb = self.log[b as usize] as usize;
            self.exp[(la + self.order - lb) % self.order]
        }
    }

    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        self.div(1, a)
    }

    /// a^n, with 0^0 = 1.
    pub fn pow(&self, a: u8, n: usize) -> u8 {
        if n == 0 {
            1
        } else if a == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] as usize * n) % self.order]
        }
    }

    /// Evaluates a polynomial given highest-degree coefficient first.
    pub fn eval_msb_first(&self, coeffs: &[u8], x: u8) -> u8 {
        coeffs.iter().fold(0u8, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Evaluates a polynomial given lowest-degree coefficient first.
    pub fn eval_lsb_first(&self, coeffs: &[u8], x: u8) -> u8 {
        coeffs.iter().rev().fold(0u8, |acc, &c| self.mul(acc, x) ^ c)
    }
}
