use std::sync::Arc;

use super::format::{decode_format_bits, encode_format_bits, encode_version_bits};
use super::{CodewordFrame, EcLevel, Version};
use crate::error::{Error, Result};

/// What a module is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleRole {
    Finder,
    Separator,
    Timing,
    Alignment,
    Format,
    DarkModule,
    VersionInfo,
    /// Carries one codeword bit.
    DataEc,
    /// Left over after the last codeword; always encodes 0 before masking.
    Remainder,
}

impl ModuleRole {
    pub fn is_function(self) -> bool {
        !matches!(self, ModuleRole::DataEc | ModuleRole::Remainder)
    }
}

/// Frame-independent geometry of one version: module roles, fixed pattern
/// values and the placement order of codeword bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub version: Version,
    pub m: usize,
    pub roles: Vec<ModuleRole>,
    /// Dark/light value of fixed function modules (format modules excluded).
    pub fixed_dark: Vec<bool>,
    /// For data modules, the codeword bit index (8·codeword + bit, MSB = 0).
    pub bit_map: Vec<Option<u32>>,
    /// Inverse of `bit_map`: module index of each codeword bit.
    pub module_of_bit: Vec<usize>,
    pub format_copy1: [(usize, usize); 15],
    pub format_copy2: [(usize, usize); 15],
}

impl Layout {
    pub fn new(version: Version) -> Self {
        let m = version.size();
        let mut roles = vec![ModuleRole::DataEc; m * m];
        let mut dark = vec![false; m * m];
        let mut set = |r: usize, c: usize, role: ModuleRole, d: bool| {
            roles[r * m + c] = role;
            dark[r * m + c] = d;
        };

        for i in 0..m {
            set(6, i, ModuleRole::Timing, i % 2 == 0);
            set(i, 6, ModuleRole::Timing, i % 2 == 0);
        }

        for (cr, cc) in [(3i64, 3i64), (3, m as i64 - 4), (m as i64 - 4, 3)] {
            for dr in -4i64..=4 {
                for dc in -4i64..=4 {
                    let (r, c) = (cr + dr, cc + dc);
                    if r < 0 || c < 0 || r >= m as i64 || c >= m as i64 {
                        continue;
                    }
                    let dist = dr.abs().max(dc.abs());
                    let role = if dist == 4 {
                        ModuleRole::Separator
                    } else {
                        ModuleRole::Finder
                    };
                    set(r as usize, c as usize, role, dist != 2 && dist != 4);
                }
            }
        }

        let align = version.alignment_positions();
        let n = align.len();
        for (i, &ar) in align.iter().enumerate() {
            for (j, &ac) in align.iter().enumerate() {
                let corner = (i == 0 && j == 0) || (i == 0 && j == n - 1) || (i == n - 1 && j == 0);
                if corner {
                    continue;
                }
                for dr in -2i64..=2 {
                    for dc in -2i64..=2 {
                        let d = dr.abs().max(dc.abs()) != 1;
                        set(
                            (ar as i64 + dr) as usize,
                            (ac as i64 + dc) as usize,
                            ModuleRole::Alignment,
                            d,
                        );
                    }
                }
            }
        }

        let (format_copy1, format_copy2) = format_positions(m);
        for &(r, c) in format_copy1.iter().chain(format_copy2.iter()) {
            set(r, c, ModuleRole::Format, false);
        }
        set(m - 8, 8, ModuleRole::DarkModule, true);

        if version.value() >= 7 {
            let bits = encode_version_bits(version.value());
            for i in 0..18 {
                let d = bits >> i & 1 == 1;
                let a = m - 11 + i % 3;
                let b = i / 3;
                set(a, b, ModuleRole::VersionInfo, d);
                set(b, a, ModuleRole::VersionInfo, d);
            }
        }

        // Zig-zag placement of codeword bits, two columns at a time from the right.
        let total_bits = version.total_codewords() * 8;
        let mut bit_map = vec![None; m * m];
        let mut module_of_bit = Vec::with_capacity(total_bits);
        let mut right = m as i64 - 1;
        while right >= 1 {
            if right == 6 {
                right = 5;
            }
            let upward = (right + 1) & 2 == 0;
            for vert in 0..m {
                for j in 0..2 {
                    let c = (right - j) as usize;
                    let r = if upward { m - 1 - vert } else { vert };
                    let idx = r * m + c;
                    if roles[idx].is_function() {
                        continue;
                    }
                    if module_of_bit.len() < total_bits {
                        bit_map[idx] = Some(module_of_bit.len() as u32);
                        module_of_bit.push(idx);
                    } else {
                        roles[idx] = ModuleRole::Remainder;
                    }
                }
            }
            right -= 2;
        }
        debug_assert_eq!(module_of_bit.len(), total_bits);

        Self {
            version,
            m,
            roles,
            fixed_dark: dark,
            bit_map,
            module_of_bit,
            format_copy1,
            format_copy2,
        }
    }

    pub fn role(&self, row: usize, col: usize) -> ModuleRole {
        self.roles[row * self.m + col]
    }

    pub fn is_function(&self, idx: usize) -> bool {
        self.roles[idx].is_function()
    }

    /// Module indices that carry codeword bits or remainder bits.
    pub fn data_modules(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.m * self.m).filter(|&i| !self.roles[i].is_function())
    }
}

type FormatPositions = [(usize, usize); 15];

/// Format information positions; index i holds bit i of the 15-bit word.
fn format_positions(m: usize) -> (FormatPositions, FormatPositions) {
    let mut a = [(0, 0); 15];
    let mut b = [(0, 0); 15];
    for (i, slot) in a.iter_mut().enumerate() {
        *slot = match i {
            0..=5 => (i, 8),
            6 => (7, 8),
            7 => (8, 8),
            8 => (8, 7),
            _ => (8, 14 - i),
        };
    }
    for (i, slot) in b.iter_mut().enumerate() {
        *slot = if i < 8 { (8, m - 1 - i) } else { (m - 15 + i, 8) };
    }
    (a, b)
}

/// ISO mask predicate: true where the mask inverts the module.
pub fn mask_bit(mask: u8, row: usize, col: usize) -> bool {
    let (i, j) = (row, col);
    match mask {
        0 => (i + j) % 2 == 0,
        1 => i % 2 == 0,
        2 => j % 3 == 0,
        3 => (i + j) % 3 == 0,
        4 => (i / 2 + j / 3) % 2 == 0,
        5 => (i * j) % 2 + (i * j) % 3 == 0,
        6 => ((i * j) % 2 + (i * j) % 3) % 2 == 0,
        7 => ((i + j) % 2 + (i * j) % 3) % 2 == 0,
        _ => panic!("mask index {mask} out of range"),
    }
}

/// A complete symbol. `dark[k]` follows the ISO convention: true is a dark module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrMatrix {
    pub version: Version,
    pub ec_level: EcLevel,
    pub mask_index: u8,
    pub m: usize,
    pub dark: Vec<bool>,
    pub layout: Arc<Layout>,
}

impl QrMatrix {
    pub fn is_dark(&self, row: usize, col: usize) -> bool {
        self.dark[row * self.m + col]
    }

    /// Brightness bit of module `idx`: 1 for light, 0 for dark.
    pub fn light_bit(&self, idx: usize) -> u8 {
        u8::from(!self.dark[idx])
    }

    pub fn role(&self, idx: usize) -> ModuleRole {
        self.layout.roles[idx]
    }

    /// Codeword bit carried by data module `idx` after unmasking.
    pub fn codeword_bit(&self, idx: usize) -> Option<bool> {
        self.layout.bit_map[idx].map(|_| self.dark[idx] ^ mask_bit(self.mask_index, idx / self.m, idx % self.m))
    }

    /// Module-wise dark/light values as a row-major string of '1'/'0'.
    pub fn to_bit_string(&self) -> String {
        self.dark.iter().map(|&d| if d { '1' } else { '0' }).collect()
    }
}

/// Places `frame` into a symbol with the given mask.
pub fn build_matrix(frame: &CodewordFrame, mask_index: u8) -> QrMatrix {
    assert!(mask_index < 8, "mask index {mask_index} out of range");
    let layout = Arc::new(Layout::new(frame.version));
    let m = layout.m;
    let mut dark = layout.fixed_dark.clone();
    let seq = frame.interleaved();
    for (idx, d) in dark.iter_mut().enumerate() {
        let (r, c) = (idx / m, idx % m);
        match layout.roles[idx] {
            ModuleRole::DataEc => {
                let q = layout.bit_map[idx].unwrap() as usize;
                let bit = seq[q / 8] >> (7 - q % 8) & 1 == 1;
                *d = bit ^ mask_bit(mask_index, r, c);
            }
            ModuleRole::Remainder => *d = mask_bit(mask_index, r, c),
            _ => {}
        }
    }
    let word = encode_format_bits(frame.ec_level, mask_index);
    for i in 0..15 {
        let d = word >> i & 1 == 1;
        let (r, c) = layout.format_copy1[i];
        dark[r * m + c] = d;
        let (r, c) = layout.format_copy2[i];
        dark[r * m + c] = d;
    }
    QrMatrix {
        version: frame.version,
        ec_level: frame.ec_level,
        mask_index,
        m,
        dark,
        layout,
    }
}

/// Reads format information and codewords from module values (no RS correction).
///
/// Returns the frame together with the level and mask recovered from the
/// format information.
pub fn read_modules(version: Version, dark: &[bool]) -> Result<(CodewordFrame, EcLevel, u8)> {
    let layout = Layout::new(version);
    let m = layout.m;
    if dark.len() != m * m {
        return Err(Error::DimensionMismatch {
            expected: (m as u32, m as u32),
            found: (dark.len() as u32, 1),
        });
    }
    let read_word = |positions: &[(usize, usize); 15]| -> u16 {
        positions
            .iter()
            .enumerate()
            .fold(0u16, |acc, (i, &(r, c))| acc | (u16::from(dark[r * m + c]) << i))
    };
    let first = decode_format_bits(read_word(&layout.format_copy1));
    let second = decode_format_bits(read_word(&layout.format_copy2));
    let (level, mask) = match (first, second) {
        (Some(a), Some(b)) => {
            let best = if b.2 < a.2 { b } else { a };
            (best.0, best.1)
        }
        (Some(a), None) | (None, Some(a)) => (a.0, a.1),
        (None, None) => return Err(Error::FormatInfo),
    };

    let mut seq = vec![0u8; version.total_codewords()];
    for (q, &idx) in layout.module_of_bit.iter().enumerate() {
        let bit = dark[idx] ^ mask_bit(mask, idx / m, idx % m);
        if bit {
            seq[q / 8] |= 1 << (7 - q % 8);
        }
    }
    let frame = CodewordFrame::from_interleaved(version, level, &seq)?;
    Ok((frame, level, mask))
}

/// Unmasks a symbol and reassembles its codewords; inverse of [`build_matrix`].
pub fn read_matrix(matrix: &QrMatrix) -> Result<CodewordFrame> {
    read_modules(matrix.version, &matrix.dark).map(|(frame, _, _)| frame)
}

/// Renders a symbol with solid square modules, `a` pixels each, no quiet zone.
pub fn render_plain(matrix: &QrMatrix, a: u32) -> image::RgbImage {
    let side = matrix.m as u32 * a;
    image::RgbImage::from_fn(side, side, |x, y| {
        let idx = (y / a) as usize * matrix.m + (x / a) as usize;
        if matrix.dark[idx] {
            image::Rgb([0, 0, 0])
        } else {
            image::Rgb([255, 255, 255])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr::encode_message;

    fn v5() -> Version {
        Version::new(5).unwrap()
    }

    #[test]
    fn v5_layout_counts() {
        let layout = Layout::new(v5());
        assert_eq!(layout.m, 37);
        let count = |role| layout.roles.iter().filter(|&&r| r == role).count();
        assert_eq!(count(ModuleRole::DataEc), 134 * 8);
        assert_eq!(count(ModuleRole::Remainder), 7);
        assert_eq!(count(ModuleRole::Format), 30);
        assert_eq!(count(ModuleRole::DarkModule), 1);
        assert_eq!(count(ModuleRole::Alignment), 25);
        assert_eq!(count(ModuleRole::Finder), 3 * 49);
        assert_eq!(count(ModuleRole::VersionInfo), 0);
    }

    #[test]
    fn bit_map_is_a_bijection() {
        for v in [1u8, 5, 7, 20, 40] {
            let layout = Layout::new(Version::new(v).unwrap());
            let mut seen = vec![false; layout.module_of_bit.len()];
            for (idx, b) in layout.bit_map.iter().enumerate() {
                if let Some(q) = b {
                    assert_eq!(layout.roles[idx], ModuleRole::DataEc);
                    assert!(!seen[*q as usize]);
                    seen[*q as usize] = true;
                    assert_eq!(layout.module_of_bit[*q as usize], idx);
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn mask_zero_darkens_even_parity_modules_of_zero_data() {
        let mut frame = encode_message(b"x", v5(), EcLevel::L).unwrap();
        frame.data_codewords.iter_mut().for_each(|b| *b = 0);
        frame.recompute_ec();
        // All-zero data gives all-zero parity.
        assert!(frame.ec_codewords.iter().all(|&b| b == 0));
        let matrix = build_matrix(&frame, 0);
        for idx in matrix.layout.data_modules() {
            let (r, c) = (idx / 37, idx % 37);
            assert_eq!(matrix.dark[idx], (r + c) % 2 == 0);
        }
    }

    #[test]
    fn round_trip_every_mask() {
        let frame = encode_message(b"round trip", v5(), EcLevel::L).unwrap();
        for mask in 0..8 {
            let matrix = build_matrix(&frame, mask);
            assert_eq!(matrix.m, 37);
            let (back, level, read_mask) = read_modules(matrix.version, &matrix.dark).unwrap();
            assert_eq!(back, frame);
            assert_eq!(level, EcLevel::L);
            assert_eq!(read_mask, mask);
        }
    }

    #[test]
    fn three_flipped_format_modules_still_decode() {
        let frame = encode_message(b"fmt", v5(), EcLevel::L).unwrap();
        let mut matrix = build_matrix(&frame, 5);
        for i in [0usize, 7, 13] {
            let (r, c) = matrix.layout.format_copy1[i];
            matrix.dark[r * 37 + c] ^= true;
            let (r, c) = matrix.layout.format_copy2[i];
            matrix.dark[r * 37 + c] ^= true;
        }
        let (back, _, mask) = read_modules(matrix.version, &matrix.dark).unwrap();
        assert_eq!(mask, 5);
        assert_eq!(back, frame);
    }

    #[test]
    fn destroyed_format_information_is_an_error() {
        let frame = encode_message(b"fmt", v5(), EcLevel::L).unwrap();
        let mut matrix = build_matrix(&frame, 2);
        // Replace both copies by a word at distance ≥ 4 from every codeword.
        let word: u16 = 0b101_0101_0101_0101;
        assert!(decode_format_bits(word).is_none());
        let layout = matrix.layout.clone();
        for i in 0..15 {
            let d = word >> i & 1 == 1;
            for (r, c) in [layout.format_copy1[i], layout.format_copy2[i]] {
                matrix.dark[r * 37 + c] = d;
            }
        }
        assert!(matches!(read_matrix(&matrix), Err(Error::FormatInfo)));
    }

    #[test]
    fn function_patterns_independent_of_frame() {
        let a = build_matrix(&encode_message(b"one", v5(), EcLevel::L).unwrap(), 3);
        let b = build_matrix(&encode_message(b"another payload", v5(), EcLevel::L).unwrap(), 3);
        for idx in 0..37 * 37 {
            if a.layout.is_function(idx) {
                assert_eq!(a.dark[idx], b.dark[idx], "module {idx}");
            }
        }
    }

    #[test]
    fn larger_versions_round_trip() {
        let version = Version::new(12).unwrap();
        let frame = encode_message(b"multi block payload", version, EcLevel::Q).unwrap();
        assert!(frame.blocks().num_blocks > 1);
        let matrix = build_matrix(&frame, 6);
        assert_eq!(read_matrix(&matrix).unwrap(), frame);
    }

    #[test]
    fn plain_render_dimensions() {
        let frame = encode_message(b"px", v5(), EcLevel::L).unwrap();
        let img = render_plain(&build_matrix(&frame, 0), 9);
        assert_eq!(img.dimensions(), (333, 333));
        // Top-left finder corner is dark.
        assert_eq!(img.get_pixel(0, 0).0, [0, 0, 0]);
    }
}
