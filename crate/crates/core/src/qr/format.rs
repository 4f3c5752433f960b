//! BCH-protected format (15,5) and version (18,6) information.

use super::EcLevel;

/// XOR mask applied to the format word so it is never all zero.
pub const FORMAT_MASK: u16 = 0x5412;

const FORMAT_GENERATOR: u32 = 0x537;
const VERSION_GENERATOR: u32 = 0x1F25;

/// The masked 15-bit format word for a level/mask pair.
pub fn encode_format_bits(level: EcLevel, mask: u8) -> u16 {
    let data = ((level.format_bits() as u32) << 3) | (mask as u32 & 7);
    let mut rem = data;
    for _ in 0..10 {
        rem = (rem << 1) ^ ((rem >> 9) * FORMAT_GENERATOR);
    }
    (((data << 10) | rem) as u16) ^ FORMAT_MASK
}

/// Nearest valid format word within Hamming distance 3, as (level, mask, distance).
pub fn decode_format_bits(word: u16) -> Option<(EcLevel, u8, u32)> {
    let word = word & 0x7FFF;
    let mut best: Option<(EcLevel, u8, u32)> = None;
    for level in EcLevel::ALL {
        for mask in 0..8u8 {
            let d = (encode_format_bits(level, mask) ^ word).count_ones();
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((level, mask, d));
            }
        }
    }
    best.filter(|&(_, _, d)| d <= 3)
}

/// The 18-bit version word (versions 7 and up).
pub fn encode_version_bits(version: u8) -> u32 {
    let data = version as u32;
    let mut rem = data;
    for _ in 0..12 {
        rem = (rem << 1) ^ ((rem >> 11) * VERSION_GENERATOR);
    }
    (data << 12) | rem
}
