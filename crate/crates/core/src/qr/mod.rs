//! ISO/IEC 18004 QR symbol machinery: byte-mode encoding, block layout,
//! module placement, masking and format information.

mod format;
mod frame;
mod matrix;

pub use format::{decode_format_bits, encode_format_bits, encode_version_bits, FORMAT_MASK};
pub use frame::{encode_message, parse_byte_segment, CodewordFrame};
pub use matrix::{build_matrix, mask_bit, read_matrix, read_modules, render_plain, Layout, ModuleRole, QrMatrix};

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Error correction level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EcLevel {
    #[default]
    L,
    M,
    Q,
    H,
}

impl EcLevel {
    pub const ALL: [EcLevel; 4] = [EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H];

    fn ordinal(self) -> usize {
        match self {
            EcLevel::L => 0,
            EcLevel::M => 1,
            EcLevel::Q => 2,
            EcLevel::H => 3,
        }
    }

    /// Two-bit field used in format information.
    pub fn format_bits(self) -> u8 {
        match self {
            EcLevel::L => 1,
            EcLevel::M => 0,
            EcLevel::Q => 3,
            EcLevel::H => 2,
        }
    }

    pub fn from_format_bits(bits: u8) -> Self {
        match bits & 3 {
            1 => EcLevel::L,
            0 => EcLevel::M,
            3 => EcLevel::Q,
            _ => EcLevel::H,
        }
    }
}

impl fmt::Display for EcLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EcLevel::L => "L",
            EcLevel::M => "M",
            EcLevel::Q => "Q",
            EcLevel::H => "H",
        };
        f.write_str(s)
    }
}

impl FromStr for EcLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L" => Ok(EcLevel::L),
            "M" => Ok(EcLevel::M),
            "Q" => Ok(EcLevel::Q),
            "H" => Ok(EcLevel::H),
            other => Err(Error::InvalidParameter(format!("unknown EC level {other:?}"))),
        }
    }
}

/// Symbol version, 1..=40.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Version(u8);

impl Version {
    pub const DEFAULT: Version = Version(5);

    pub fn new(v: u8) -> crate::Result<Self> {
        if (1..=40).contains(&v) {
            Ok(Version(v))
        } else {
            Err(Error::InvalidParameter(format!("version {v} outside 1..=40")))
        }
    }

    /// Version whose symbol is `m` modules wide.
    pub fn from_size(m: usize) -> crate::Result<Self> {
        if m < 21 || !(m - 17).is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!("{m} is not a QR symbol size")));
        }
        Version::new(((m - 17) / 4) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Modules per side, 17 + 4·version.
    pub fn size(self) -> usize {
        17 + 4 * self.0 as usize
    }

    /// Modules available for codewords and remainder bits.
    pub fn raw_data_modules(self) -> usize {
        let v = self.0 as usize;
        let mut result = (16 * v + 128) * v + 64;
        if v >= 2 {
            let num_align = v / 7 + 2;
            result -= (25 * num_align - 10) * num_align - 55;
            if v >= 7 {
                result -= 36;
            }
        }
        result
    }

    pub fn total_codewords(self) -> usize {
        self.raw_data_modules() / 8
    }

    /// Centres of alignment patterns along one axis.
    pub fn alignment_positions(self) -> Vec<usize> {
        let v = self.0 as usize;
        if v == 1 {
            return Vec::new();
        }
        let num_align = v / 7 + 2;
        let step = (v * 8 + num_align * 3 + 5) / (num_align * 4 - 4) * 2;
        let size = self.size();
        let mut result: Vec<usize> = (0..num_align - 1).map(|i| size - 7 - i * step).collect();
        result.push(6);
        result.reverse();
        result
    }

    /// Width of the byte-mode character count field.
    pub fn byte_count_bits(self) -> usize {
        if self.0 <= 9 {
            8
        } else {
            16
        }
    }
}

impl Default for Version {
    fn default() -> Self {
        Version::DEFAULT
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Block structure of one version/level combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub num_blocks: usize,
    pub ec_per_block: usize,
    pub total_codewords: usize,
}

impl BlockSpec {
    pub fn new(version: Version, level: EcLevel) -> Self {
        let v = version.value() as usize;
        Self {
            num_blocks: NUM_EC_BLOCKS[level.ordinal()][v] as usize,
            ec_per_block: EC_CODEWORDS_PER_BLOCK[level.ordinal()][v] as usize,
            total_codewords: version.total_codewords(),
        }
    }

    pub fn ec_codewords(&self) -> usize {
        self.num_blocks * self.ec_per_block
    }

    pub fn data_codewords(&self) -> usize {
        self.total_codewords - self.ec_codewords()
    }

    /// Data length of each block; short blocks come first.
    pub fn data_lengths(&self) -> Vec<usize> {
        let short_blocks = self.num_blocks - self.total_codewords % self.num_blocks;
        let short_len = self.total_codewords / self.num_blocks - self.ec_per_block;
        (0..self.num_blocks)
            .map(|b| if b < short_blocks { short_len } else { short_len + 1 })
            .collect()
    }
}

#[rustfmt::skip]
static EC_CODEWORDS_PER_BLOCK: [[i8; 41]; 4] = [
    [-1,  7, 10, 15, 20, 26, 18, 20, 24, 30, 18, 20, 24, 26, 30, 22, 24, 28, 30, 28, 28, 28, 28, 30, 30, 26, 28, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
    [-1, 10, 16, 26, 18, 24, 16, 18, 22, 22, 26, 30, 22, 22, 24, 24, 28, 28, 26, 26, 26, 26, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28],
    [-1, 13, 22, 18, 26, 18, 24, 18, 22, 20, 24, 28, 26, 24, 20, 30, 24, 28, 28, 26, 30, 28, 30, 30, 30, 30, 28, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
    [-1, 17, 28, 22, 16, 22, 28, 26, 26, 24, 28, 24, 28, 22, 24, 24, 30, 28, 28, 26, 28, 30, 24, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
];

#[rustfmt::skip]
static NUM_EC_BLOCKS: [[i8; 41]; 4] = [
    [-1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 4,  4,  4,  4,  4,  6,  6,  6,  6,  7,  8,  8,  9,  9, 10, 12, 12, 12, 13, 14, 15, 16, 17, 18, 19, 19, 20, 21, 22, 24, 25],
    [-1, 1, 1, 1, 2, 2, 4, 4, 4, 5, 5,  5,  8,  9,  9, 10, 10, 11, 13, 14, 16, 17, 17, 18, 20, 21, 23, 25, 26, 28, 29, 31, 33, 35, 37, 38, 40, 43, 45, 47, 49],
    [-1, 1, 1, 2, 2, 4, 4, 6, 6, 8, 8,  8, 10, 12, 16, 12, 17, 16, 18, 21, 20, 23, 23, 25, 27, 29, 34, 34, 35, 38, 40, 43, 45, 48, 51, 53, 56, 59, 62, 65, 68],
    [-1, 1, 1, 2, 4, 4, 4, 5, 6, 8, 8, 11, 11, 16, 16, 18, 16, 19, 21, 25, 25, 25, 34, 30, 32, 35, 37, 40, 42, 45, 48, 51, 54, 57, 60, 63, 66, 70, 74, 77, 81],
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v5l_capacity() {
        let v = Version::new(5).unwrap();
        assert_eq!(v.size(), 37);
        assert_eq!(v.total_codewords(), 134);
        assert_eq!(v.raw_data_modules() % 8, 7);
        let spec = BlockSpec::new(v, EcLevel::L);
        assert_eq!(spec.num_blocks, 1);
        assert_eq!(spec.data_codewords(), 108);
        assert_eq!(spec.ec_codewords(), 26);
        assert_eq!(v.alignment_positions(), vec![6, 30]);
    }

    #[test]
    fn block_lengths_sum_to_data_capacity() {
        for v in 1..=40 {
            let version = Version::new(v).unwrap();
            for level in EcLevel::ALL {
                let spec = BlockSpec::new(version, level);
                let lens = spec.data_lengths();
                assert_eq!(lens.iter().sum::<usize>(), spec.data_codewords());
            }
        }
    }

    #[test]
    fn version_from_size() {
        assert_eq!(Version::from_size(37).unwrap().value(), 5);
        assert!(Version::from_size(38).is_err());
        assert!(Version::new(0).is_err());
        assert!(Version::new(41).is_err());
    }

    #[test]
    fn level_parsing() {
        assert_eq!("l".parse::<EcLevel>().unwrap(), EcLevel::L);
        assert!("X".parse::<EcLevel>().is_err());
        for level in EcLevel::ALL {
            assert_eq!(EcLevel::from_format_bits(level.format_bits()), level);
        }
    }
}
