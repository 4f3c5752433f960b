//! Model of a camera-side QR reader working on a known module grid.
//!
//! Gray conversion keeps real values. Thresholds come from mean-block
//! binarization: the raster is tiled into 8×8 blocks (edge blocks may be
//! smaller), each block contributes its arithmetic mean, and every pixel of a
//! block is thresholded at the average of the block means in the 5×5 block
//! window around it. Near the border the window is shifted inward so it keeps
//! its size whenever the raster has at least five blocks along an axis.
//! Sampling reads only the centre pixel of each module.

use crate::error::{Error, Result};
use crate::grid::ModuleGrid;
use crate::qr::{read_modules, EcLevel, Version};
use crate::raster::{ColorImage, GrayImage};

pub use crate::raster::to_gray;

pub const BLOCK_SIZE: u32 = 8;
const WINDOW: usize = 5;

/// Per-pixel thresholds derived from block means.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdField {
    pub block_size: u32,
    width: u32,
    height: u32,
    blocks_x: usize,
    blocks_y: usize,
    block_means: Vec<f64>,
    block_thresholds: Vec<f64>,
}

impl ThresholdField {
    #[inline]
    pub fn at(&self, x: u32, y: u32) -> f64 {
        let bx = (x / self.block_size) as usize;
        let by = (y / self.block_size) as usize;
        self.block_thresholds[by * self.blocks_x + bx]
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// (columns, rows) of blocks.
    pub fn block_grid(&self) -> (usize, usize) {
        (self.blocks_x, self.blocks_y)
    }

    pub fn block_means(&self) -> &[f64] {
        &self.block_means
    }

    /// Full per-pixel threshold raster.
    pub fn thresholds(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| self.at(x, y))
    }
}

fn window_start(b: usize, n: usize) -> usize {
    let half = WINDOW / 2;
    b.saturating_sub(half).min(n.saturating_sub(WINDOW))
}

/// Mean-block binarization thresholds of a gray raster.
pub fn binarize_field(gray: &GrayImage) -> ThresholdField {
    let (w, h) = gray.dimensions();
    let bs = BLOCK_SIZE;
    let blocks_x = w.div_ceil(bs) as usize;
    let blocks_y = h.div_ceil(bs) as usize;

    let mut sums = vec![0.0f64; blocks_x * blocks_y];
    let data = gray.data();
    for y in 0..h as usize {
        let row = &data[y * w as usize..(y + 1) * w as usize];
        let by = y / bs as usize;
        for (x, &v) in row.iter().enumerate() {
            sums[by * blocks_x + x / bs as usize] += v;
        }
    }
    let mut block_means = sums;
    for by in 0..blocks_y {
        let bh = (h - by as u32 * bs).min(bs);
        for bx in 0..blocks_x {
            let bw = (w - bx as u32 * bs).min(bs);
            block_means[by * blocks_x + bx] /= (bw * bh) as f64;
        }
    }

    let mut block_thresholds = vec![0.0; blocks_x * blocks_y];
    for by in 0..blocks_y {
        let y0 = window_start(by, blocks_y);
        let y1 = (y0 + WINDOW).min(blocks_y);
        for bx in 0..blocks_x {
            let x0 = window_start(bx, blocks_x);
            let x1 = (x0 + WINDOW).min(blocks_x);
            let mut acc = 0.0;
            for yy in y0..y1 {
                for xx in x0..x1 {
                    acc += block_means[yy * blocks_x + xx];
                }
            }
            block_thresholds[by * blocks_x + bx] = acc / ((y1 - y0) * (x1 - x0)) as f64;
        }
    }

    ThresholdField {
        block_size: bs,
        width: w,
        height: h,
        blocks_x,
        blocks_y,
        block_means,
        block_thresholds,
    }
}

/// Thresholding function: 1 (light) iff `gray` ≥ `threshold`.
#[inline]
pub fn psi(gray: f64, threshold: f64) -> u8 {
    u8::from(gray >= threshold)
}

/// Gray values and binarized bits at module centres, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub m: usize,
    pub grays: Vec<f64>,
    /// 1 for light, 0 for dark.
    pub bits: Vec<u8>,
}

impl SampledGrid {
    /// ISO module values (true = dark).
    pub fn dark_modules(&self) -> Vec<bool> {
        self.bits.iter().map(|&b| b == 0).collect()
    }
}

fn check_fits(gray: &GrayImage, grid: &ModuleGrid) -> Result<()> {
    let need = (grid.origin.0 + grid.side(), grid.origin.1 + grid.side());
    let (w, h) = gray.dimensions();
    if need.0 > w || need.1 > h {
        return Err(Error::DimensionMismatch {
            expected: need,
            found: (w, h),
        });
    }
    Ok(())
}

/// Samples every module centre and thresholds it.
pub fn sample(gray: &GrayImage, field: &ThresholdField, grid: &ModuleGrid) -> Result<SampledGrid> {
    check_fits(gray, grid)?;
    if field.dimensions() != gray.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: gray.dimensions(),
            found: field.dimensions(),
        });
    }
    let n = grid.m * grid.m;
    let mut grays = Vec::with_capacity(n);
    let mut bits = Vec::with_capacity(n);
    for k in 0..n {
        let (x, y) = grid.center(k);
        let g = gray.get(x, y);
        grays.push(g);
        bits.push(psi(g, field.at(x, y)));
    }
    Ok(SampledGrid { m: grid.m, grays, bits })
}

/// Result of a successful decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub payload: Vec<u8>,
    /// Codewords repaired by Reed–Solomon.
    pub corrections: usize,
    pub ec_level: EcLevel,
    pub mask_index: u8,
}

/// Decodes a gray raster: binarize, sample, read modules, RS-correct, parse.
pub fn decode_gray(gray: &GrayImage, grid: &ModuleGrid, mask_index: u8) -> Result<DecodeOutcome> {
    let version = Version::from_size(grid.m)?;
    let field = binarize_field(gray);
    let sampled = sample(gray, &field, grid)?;
    let (frame, ec_level, mask) = read_modules(version, &sampled.dark_modules())?;
    if mask != mask_index {
        return Err(Error::FormatMismatch {
            expected: format!("mask {mask_index}"),
            found: format!("mask {mask}"),
        });
    }
    let (fixed, corrections) = frame.corrected()?;
    let payload = fixed.payload()?;
    Ok(DecodeOutcome {
        payload,
        corrections,
        ec_level,
        mask_index: mask,
    })
}

/// Full decode of a color raster laid out on `grid`.
pub fn decode_check(image: &ColorImage, grid: &ModuleGrid, mask_index: u8) -> Result<DecodeOutcome> {
    decode_gray(&to_gray(image), grid, mask_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr::{build_matrix, encode_message, render_plain};

    #[test]
    fn psi_uses_closed_upper_interval() {
        assert_eq!(psi(200.0, 128.0), 1);
        assert_eq!(psi(127.9, 128.0), 0);
        assert_eq!(psi(128.0, 128.0), 1);
    }

    #[test]
    fn uniform_image_thresholds_equal_gray() {
        for g in [0.0, 17.5, 255.0] {
            let img = GrayImage::new(50, 37, g);
            let field = binarize_field(&img);
            for y in 0..37 {
                for x in 0..50 {
                    assert!((field.at(x, y) - g).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn half_black_half_white() {
        let img = GrayImage::from_fn(128, 128, |x, _| if x < 64 { 0.0 } else { 255.0 });
        let field = binarize_field(&img);
        assert_eq!(field.at(5, 60), 0.0);
        assert_eq!(field.at(20, 100), 0.0);
        assert_eq!(field.at(120, 7), 255.0);
    }

    #[test]
    fn edge_blocks_average_their_own_pixels() {
        // 9 columns: block 1 holds a single column.
        let img = GrayImage::from_fn(9, 8, |x, _| if x == 8 { 90.0 } else { 10.0 });
        let field = binarize_field(&img);
        assert_eq!(field.block_grid(), (2, 1));
        assert_eq!(field.block_means(), &[10.0, 90.0]);
        assert!((field.at(0, 0) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_black_image_samples_light() {
        let img = GrayImage::new(21 * 3, 21 * 3, 0.0);
        let grid = ModuleGrid::new(3, 21).unwrap();
        let s = sample(&img, &binarize_field(&img), &grid).unwrap();
        assert!(s.bits.iter().all(|&b| b == 1));
    }

    #[test]
    fn sample_checks_dimensions() {
        let img = GrayImage::new(100, 100, 0.0);
        let grid = ModuleGrid::new(13, 37).unwrap();
        assert!(matches!(
            sample(&img, &binarize_field(&img), &grid),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pristine_render_decodes_cleanly() {
        let frame = encode_message(b"pristine", Version::new(5).unwrap(), EcLevel::L).unwrap();
        for mask in [0, 3, 7] {
            let img = render_plain(&build_matrix(&frame, mask), 13);
            let grid = ModuleGrid::new(13, 37).unwrap();
            let out = decode_check(&img, &grid, mask).unwrap();
            assert_eq!(out.payload, b"pristine");
            assert_eq!(out.corrections, 0);
            assert!(matches!(
                decode_check(&img, &grid, (mask + 1) % 8),
                Err(Error::FormatMismatch { .. })
            ));
        }
    }
}
