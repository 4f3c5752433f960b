//! Baseline aesthetic code: match module colours to the blended image's
//! global gray values, then render the symbol as small spots over the image.
//!
//! Each module gets a target brightness bit from the Gaussian-weighted mean
//! gray under it and a priority that grows the closer that mean is to pure
//! black or white. Modules are then visited in priority order and the free
//! (post-terminator) data bits are chosen by Gauss–Jordan elimination over
//! GF(2): because Reed–Solomon encoding is linear, flipping one free bit XORs
//! a fixed pattern into the full codeword stream, so each pattern is a basis
//! row and every pivot pins one more module to its target.

use image::Rgb;

use crate::error::{Error, Result};
use crate::grid::{disc_offsets, GaussianModuleKernel, ModuleGrid};
use crate::qr::{build_matrix, mask_bit, CodewordFrame, ModuleRole, QrMatrix};
use crate::raster::{check_dims, ColorImage, GrayImage};

/// Per-module targets and scheduling priorities.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityPlan {
    pub m: usize,
    /// Gaussian-weighted mean gray of each module.
    pub mean_gray: Vec<f64>,
    /// Target brightness bit (1 light, 0 dark).
    pub targets: Vec<u8>,
    /// Normalised priority in [0, 1].
    pub priorities: Vec<f64>,
    /// Function-pattern modules; never scheduled.
    pub fixed: Vec<bool>,
}

impl PriorityPlan {
    /// Data modules sorted by descending priority, row-major on ties.
    pub fn schedule_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.m * self.m).filter(|&k| !self.fixed[k]).collect();
        order.sort_by(|&a, &b| self.priorities[b].total_cmp(&self.priorities[a]));
        order
    }

    /// Number of codeword-carrying modules whose colour equals their target.
    pub fn match_count(&self, matrix: &QrMatrix) -> usize {
        (0..self.m * self.m)
            .filter(|&k| matrix.role(k) == ModuleRole::DataEc)
            .filter(|&k| matrix.light_bit(k) == self.targets[k])
            .count()
    }
}

/// Targets and priorities from the gray blended image.
///
/// With ḡ the kernel-weighted module mean, the target is round(ḡ/255) and the
/// priority is 1 − |ḡ − 255·target|/127.5.
pub fn compute_plan(image_gray: &GrayImage, kernel: &GaussianModuleKernel, layout: &QrMatrix) -> Result<PriorityPlan> {
    let a = kernel.side();
    let m = layout.m;
    let side = m as u32 * a;
    check_dims((side, side), image_gray.dimensions())?;
    let grid = ModuleGrid::new(a, m)?;

    let n = m * m;
    let mut mean_gray = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    let mut priorities = Vec::with_capacity(n);
    for k in 0..n {
        let (cx, cy) = grid.center(k);
        let g: f64 = kernel
            .iter()
            .map(|(i, j, w)| w * image_gray.get((cx as i32 + i) as u32, (cy as i32 + j) as u32))
            .sum();
        let b = (g / 255.0).round().clamp(0.0, 1.0);
        let p = (1.0 - (g - 255.0 * b).abs() / 127.5).clamp(0.0, 1.0);
        mean_gray.push(g);
        targets.push(b as u8);
        priorities.push(p);
    }
    let fixed = (0..n).map(|k| layout.layout.is_function(k)).collect();
    Ok(PriorityPlan {
        m,
        mean_gray,
        targets,
        priorities,
        fixed,
    })
}

/// Bit vector over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Row(Vec<u64>);

impl Gf2Row {
    pub fn zeros(bits: usize) -> Self {
        Gf2Row(vec![0; bits.div_ceil(64)])
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut row = Self::zeros(bytes.len() * 8);
        for (i, &b) in bytes.iter().enumerate() {
            for k in 0..8 {
                if b >> (7 - k) & 1 == 1 {
                    row.set(i * 8 + k);
                }
            }
        }
        row
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Gf2Row) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_bytes(&self, len: usize) -> Vec<u8> {
        (0..len)
            .map(|i| (0..8).fold(0u8, |acc, k| (acc << 1) | u8::from(self.get(i * 8 + k))))
            .collect()
    }
}

/// One elimination step: module `module` was pinned using the basis row
/// that started as free bit `free_bit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pivot {
    pub module: usize,
    pub codeword_bit: usize,
    pub free_bit: usize,
    /// Whether the row was XORed into the codeword to reach the target.
    pub applied: bool,
}

/// Effect of each free bit on the full interleaved codeword bit stream.
#[derive(Debug, Clone)]
pub struct SchedulingBasis {
    pub free_bits: Vec<usize>,
    pub rows: Vec<Gf2Row>,
    pub pivot_log: Vec<Pivot>,
}

impl SchedulingBasis {
    pub fn from_frame(frame: &CodewordFrame) -> Self {
        let base = frame.interleaved();
        let base_row = Gf2Row::from_bytes(&base);
        let mut rows = Vec::with_capacity(frame.free_bit_positions.len());
        for &p in &frame.free_bit_positions {
            let mut flipped = frame.clone();
            flipped.flip_data_bit(p);
            flipped.recompute_ec();
            let mut row = Gf2Row::from_bytes(&flipped.interleaved());
            row.xor_assign(&base_row);
            rows.push(row);
        }
        Self {
            free_bits: frame.free_bit_positions.clone(),
            rows,
            pivot_log: Vec::new(),
        }
    }

    /// Pivots consumed by the last [`schedule`] run.
    pub fn consumed(&self) -> usize {
        self.pivot_log.len()
    }
}

/// A scheduled symbol with its codewords and elimination record.
#[derive(Debug, Clone)]
pub struct Scheduled {
    pub matrix: QrMatrix,
    pub frame: CodewordFrame,
    pub basis: SchedulingBasis,
}

/// Chooses the free bits so the highest-priority modules take their target colour.
///
/// `layout` supplies the mask and geometry, typically `build_matrix(frame, mask)`.
pub fn schedule(frame: &CodewordFrame, plan: &PriorityPlan, layout: &QrMatrix) -> Result<Scheduled> {
    if plan.m != layout.m {
        return Err(Error::DimensionMismatch {
            expected: (layout.m as u32, layout.m as u32),
            found: (plan.m as u32, plan.m as u32),
        });
    }
    let mask = layout.mask_index;
    let m = layout.m;
    let mut basis = SchedulingBasis::from_frame(frame);
    let mut current = Gf2Row::from_bytes(&frame.interleaved());

    // Pool of unconsumed rows, tagged with the free bit they started from.
    let mut pool: Vec<(usize, Gf2Row)> = basis
        .free_bits
        .iter()
        .copied()
        .zip(basis.rows.iter().cloned())
        .collect();

    for k in plan.schedule_order() {
        if pool.is_empty() {
            break;
        }
        let Some(q) = layout.layout.bit_map[k].map(|q| q as usize) else {
            continue;
        };
        let Some(pi) = pool.iter().position(|(_, row)| row.get(q)) else {
            continue;
        };
        let (free_bit, pivot) = pool.swap_remove(pi);
        let want_dark = plan.targets[k] == 0;
        let want_bit = want_dark ^ mask_bit(mask, k / m, k % m);
        let applied = current.get(q) != want_bit;
        if applied {
            current.xor_assign(&pivot);
        }
        for (_, row) in pool.iter_mut() {
            if row.get(q) {
                row.xor_assign(&pivot);
            }
        }
        basis.pivot_log.push(Pivot {
            module: k,
            codeword_bit: q,
            free_bit,
            applied,
        });
    }

    let total = frame.blocks().total_codewords;
    let scheduled_frame = CodewordFrame::from_interleaved(frame.version, frame.ec_level, &current.to_bytes(total))?;
    let matrix = build_matrix(&scheduled_frame, mask);
    Ok(Scheduled {
        matrix,
        frame: scheduled_frame,
        basis,
    })
}

const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
const WHITE: Rgb<u8> = Rgb([255, 255, 255]);

/// Overlays the symbol on the image: hard discs of radius `spot_radius` for
/// data modules, solid squares for function patterns.
pub fn compose_qa(
    image_color: &ColorImage,
    scheduled: &QrMatrix,
    grid: &ModuleGrid,
    spot_radius: u32,
) -> Result<ColorImage> {
    grid.check_radius(spot_radius)?;
    if grid.m != scheduled.m {
        return Err(Error::InvalidParameter(format!(
            "grid has {} modules per side, symbol has {}",
            grid.m, scheduled.m
        )));
    }
    let side = grid.side();
    check_dims((grid.origin.0 + side, grid.origin.1 + side), image_color.dimensions())?;
    let mut out = image_color.clone();
    let disc = disc_offsets(spot_radius);
    let half = grid.half() as i32;
    for k in 0..grid.m * grid.m {
        let color = if scheduled.dark[k] { BLACK } else { WHITE };
        let (cx, cy) = grid.center(k);
        if scheduled.role(k).is_function() {
            for j in -half..=half {
                for i in -half..=half {
                    out.put_pixel((cx as i32 + i) as u32, (cy as i32 + j) as u32, color);
                }
            }
        } else {
            for &(i, j) in &disc {
                out.put_pixel((cx as i32 + i) as u32, (cy as i32 + j) as u32, color);
            }
        }
    }
    Ok(out)
}
