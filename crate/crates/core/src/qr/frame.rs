use super::{BlockSpec, EcLevel, Version};
use crate::error::{Error, Result};
use crate::gf::GaloisField;
use crate::rs::ReedSolomon;

const MODE_BYTE: u32 = 0b0100;
const PAD_BYTES: [u8; 2] = [0xEC, 0x11];

/// Data and parity codewords of one symbol, in block order (not interleaved).
///
/// `free_bit_positions` indexes the data bit stream (bit 0 is the MSB of data
/// codeword 0) and lists every position after the terminator. A decoder never
/// reads those bits, so they may take arbitrary values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordFrame {
    pub version: Version,
    pub ec_level: EcLevel,
    pub data_codewords: Vec<u8>,
    pub ec_codewords: Vec<u8>,
    pub free_bit_positions: Vec<usize>,
}

impl CodewordFrame {
    pub fn blocks(&self) -> BlockSpec {
        BlockSpec::new(self.version, self.ec_level)
    }

    /// Recomputes parity for every block from the current data codewords.
    pub fn recompute_ec(&mut self) {
        let spec = self.blocks();
        let rs = ReedSolomon::new(GaloisField::qr(), spec.ec_per_block);
        let mut ec = Vec::with_capacity(spec.ec_codewords());
        let mut start = 0;
        for len in spec.data_lengths() {
            ec.extend(rs.encode(&self.data_codewords[start..start + len]));
            start += len;
        }
        self.ec_codewords = ec;
    }

    /// True when every block has all-zero syndromes.
    pub fn is_consistent(&self) -> bool {
        let spec = self.blocks();
        let rs = ReedSolomon::new(GaloisField::qr(), spec.ec_per_block);
        let mut start = 0;
        for (b, len) in spec.data_lengths().into_iter().enumerate() {
            let mut block = self.data_codewords[start..start + len].to_vec();
            block.extend_from_slice(&self.ec_codewords[b * spec.ec_per_block..(b + 1) * spec.ec_per_block]);
            if rs.syndromes(&block).iter().any(|&s| s != 0) {
                return false;
            }
            start += len;
        }
        true
    }

    pub fn data_bit(&self, pos: usize) -> bool {
        self.data_codewords[pos / 8] >> (7 - pos % 8) & 1 == 1
    }

    pub fn flip_data_bit(&mut self, pos: usize) {
        self.data_codewords[pos / 8] ^= 1 << (7 - pos % 8);
    }

    /// Final codeword sequence as placed in the symbol.
    pub fn interleaved(&self) -> Vec<u8> {
        let spec = self.blocks();
        let lens = spec.data_lengths();
        let mut starts = Vec::with_capacity(lens.len());
        let mut acc = 0;
        for &l in &lens {
            starts.push(acc);
            acc += l;
        }
        let max_len = lens.iter().copied().max().unwrap_or(0);
        let mut out = Vec::with_capacity(spec.total_codewords);
        for i in 0..max_len {
            for (b, &l) in lens.iter().enumerate() {
                if i < l {
                    out.push(self.data_codewords[starts[b] + i]);
                }
            }
        }
        for i in 0..spec.ec_per_block {
            for b in 0..spec.num_blocks {
                out.push(self.ec_codewords[b * spec.ec_per_block + i]);
            }
        }
        out
    }

    /// Inverse of [`interleaved`](Self::interleaved). Free bits are recovered
    /// by parsing the segment header when it is readable.
    pub fn from_interleaved(version: Version, ec_level: EcLevel, seq: &[u8]) -> Result<Self> {
        let spec = BlockSpec::new(version, ec_level);
        if seq.len() != spec.total_codewords {
            return Err(Error::InvalidParameter(format!(
                "expected {} codewords, got {}",
                spec.total_codewords,
                seq.len()
            )));
        }
        let lens = spec.data_lengths();
        let mut blocks: Vec<Vec<u8>> = lens.iter().map(|&l| Vec::with_capacity(l)).collect();
        let max_len = lens.iter().copied().max().unwrap_or(0);
        let mut k = 0;
        for i in 0..max_len {
            for (b, &l) in lens.iter().enumerate() {
                if i < l {
                    blocks[b].push(seq[k]);
                    k += 1;
                }
            }
        }
        let mut ec = vec![0u8; spec.ec_codewords()];
        for i in 0..spec.ec_per_block {
            for b in 0..spec.num_blocks {
                ec[b * spec.ec_per_block + i] = seq[k];
                k += 1;
            }
        }
        let data: Vec<u8> = blocks.concat();
        let free_bit_positions = segment_end(&data, version)
            .map(|end| (end..data.len() * 8).collect())
            .unwrap_or_default();
        Ok(Self {
            version,
            ec_level,
            data_codewords: data,
            ec_codewords: ec,
            free_bit_positions,
        })
    }

    /// Runs the Reed–Solomon decoder over every block, returning the
    /// corrected frame and the total number of corrected codewords.
    pub fn corrected(&self) -> Result<(CodewordFrame, usize)> {
        let spec = self.blocks();
        let rs = ReedSolomon::new(GaloisField::qr(), spec.ec_per_block);
        let mut data = Vec::with_capacity(self.data_codewords.len());
        let mut ec = Vec::with_capacity(self.ec_codewords.len());
        let mut total = 0;
        let mut start = 0;
        for (b, len) in spec.data_lengths().into_iter().enumerate() {
            let mut block = self.data_codewords[start..start + len].to_vec();
            block.extend_from_slice(&self.ec_codewords[b * spec.ec_per_block..(b + 1) * spec.ec_per_block]);
            total += rs.decode_in_place(&mut block)?;
            data.extend_from_slice(&block[..len]);
            ec.extend_from_slice(&block[len..]);
            start += len;
        }
        let free_bit_positions = segment_end(&data, self.version)
            .map(|end| (end..data.len() * 8).collect())
            .unwrap_or_default();
        Ok((
            CodewordFrame {
                version: self.version,
                ec_level: self.ec_level,
                data_codewords: data,
                ec_codewords: ec,
                free_bit_positions,
            },
            total,
        ))
    }

    /// The byte-mode payload carried by the data codewords.
    pub fn payload(&self) -> Result<Vec<u8>> {
        parse_byte_segment(&self.data_codewords, self.version)
    }
}

struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    fn push(&mut self, value: u32, width: usize) {
        for i in (0..width).rev() {
            self.bits.push(value >> i & 1 == 1);
        }
    }
}

/// Encodes `payload` as a single byte-mode segment.
pub fn encode_message(payload: &[u8], version: Version, ec_level: EcLevel) -> Result<CodewordFrame> {
    let spec = BlockSpec::new(version, ec_level);
    let capacity_bits = spec.data_codewords() * 8;
    let count_bits = version.byte_count_bits();
    let needed_bits = 4 + count_bits + 8 * payload.len();
    if needed_bits > capacity_bits || payload.len() >= 1 << count_bits {
        return Err(Error::CapacityExceeded {
            needed_bits,
            capacity_bits,
        });
    }

    let mut w = BitWriter {
        bits: Vec::with_capacity(capacity_bits),
    };
    w.push(MODE_BYTE, 4);
    w.push(payload.len() as u32, count_bits);
    for &b in payload {
        w.push(b as u32, 8);
    }
    let terminator = (capacity_bits - w.bits.len()).min(4);
    w.push(0, terminator);
    let free_start = w.bits.len();
    while !w.bits.len().is_multiple_of(8) {
        w.bits.push(false);
    }
    for &pad in PAD_BYTES.iter().cycle() {
        if w.bits.len() >= capacity_bits {
            break;
        }
        w.push(pad as u32, 8);
    }
    debug_assert_eq!(w.bits.len(), capacity_bits);

    let data_codewords: Vec<u8> = w
        .bits
        .chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
        .collect();
    let mut frame = CodewordFrame {
        version,
        ec_level,
        data_codewords,
        ec_codewords: Vec::new(),
        free_bit_positions: (free_start..capacity_bits).collect(),
    };
    frame.recompute_ec();
    Ok(frame)
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn remaining(&self) -> usize {
        self.data.len() * 8 - self.pos
    }

    fn read(&mut self, width: usize) -> Option<u32> {
        if width > self.remaining() {
            return None;
        }
        let mut v = 0u32;
        for _ in 0..width {
            let bit = self.data[self.pos / 8] >> (7 - self.pos % 8) & 1;
            v = (v << 1) | bit as u32;
            self.pos += 1;
        }
        Some(v)
    }
}

/// Reads one byte-mode segment and returns its bytes.
pub fn parse_byte_segment(data: &[u8], version: Version) -> Result<Vec<u8>> {
    let mut r = BitReader { data, pos: 0 };
    let mode = r.read(4).ok_or_else(|| Error::Bitstream("empty data stream".into()))?;
    if mode != MODE_BYTE {
        return Err(Error::Bitstream(format!("unsupported mode indicator {mode:04b}")));
    }
    let count = r
        .read(version.byte_count_bits())
        .ok_or_else(|| Error::Bitstream("truncated character count".into()))? as usize;
    (0..count)
        .map(|_| {
            r.read(8)
                .map(|b| b as u8)
                .ok_or_else(|| Error::Bitstream("segment longer than data stream".into()))
        })
        .collect()
}

/// Bit index just past the terminator, when the header is readable.
fn segment_end(data: &[u8], version: Version) -> Option<usize> {
    let mut r = BitReader { data, pos: 0 };
    if r.read(4)? != MODE_BYTE {
        return None;
    }
    let count = r.read(version.byte_count_bits())? as usize;
    let end = r.pos + 8 * count;
    if end > data.len() * 8 {
        return None;
    }
    Some(end + (data.len() * 8 - end).min(4))
}
