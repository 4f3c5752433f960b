//! Robustness evaluation and iterative correction of a stylized code.
//!
//! A pixel is robust when thresholding it against a threshold pushed a
//! fraction δ towards its ideal side still yields the ideal bit. A module's
//! score is the Gaussian-weighted fraction of robust pixels; modules scoring
//! below η are non-robust. Correction forces the grays of non-robust modules
//! past their margin thresholds, recomputes the thresholds and repeats until
//! every module is robust. The corrected gray raster is finally re-colored
//! from a copy of the stylized image whose corrected spots were filled with
//! the surrounding color.

use std::collections::BTreeSet;

use image::Rgb;

use crate::decoder::{binarize_field, psi, ThresholdField};
use crate::error::{Error, Result};
use crate::grid::{disc_offsets, ring_offsets, GaussianModuleKernel, ModuleGrid};
use crate::qr::QrMatrix;
use crate::raster::{check_dims, luma, to_gray, ColorImage, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessParams {
    /// Margin fraction δ.
    pub delta: f64,
    /// Classification threshold η.
    pub eta: f64,
    /// Spot radius r in pixels.
    pub spot_radius: u32,
    pub max_iterations: usize,
    /// Extra gray distance beyond the margin threshold when forcing a pixel.
    pub slack: f64,
    /// Added to δ when choosing and forcing modules, so corrected modules
    /// keep headroom against later threshold drift. The exit test uses δ.
    pub hysteresis: f64,
}

impl Default for RobustnessParams {
    fn default() -> Self {
        Self {
            delta: 0.1,
            eta: 0.8,
            spot_radius: 3,
            max_iterations: 20,
            slack: 2.0,
            hysteresis: 0.05,
        }
    }
}

impl RobustnessParams {
    pub fn validate(&self, grid: &ModuleGrid) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..=1.0).contains(&self.delta) {
            return bad(format!("delta {} outside [0, 1]", self.delta));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta {} outside (0, 1]", self.eta));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return bad(format!("slack {} must be non-negative", self.slack));
        }
        if !(self.hysteresis >= 0.0 && self.hysteresis.is_finite()) {
            return bad(format!("hysteresis {} must be non-negative", self.hysteresis));
        }
        grid.check_radius(self.spot_radius)
    }
}

/// Per-pixel ideal bits: inside the spot of module k the light bit of k in
/// the scheduled symbol, elsewhere the pixel's own current binarization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealBitField {
    width: u32,
    /// -1 outside every spot, otherwise the ideal bit.
    spot_bits: Vec<i8>,
}

impl IdealBitField {
    pub fn new(scheduled: &QrMatrix, grid: &ModuleGrid, spot_radius: u32, dims: (u32, u32)) -> Result<Self> {
        grid.check_radius(spot_radius)?;
        let need = (grid.origin.0 + grid.side(), grid.origin.1 + grid.side());
        if need.0 > dims.0 || need.1 > dims.1 || grid.m != scheduled.m {
            return Err(Error::DimensionMismatch {
                expected: need,
                found: dims,
            });
        }
        let mut spot_bits = vec![-1i8; dims.0 as usize * dims.1 as usize];
        let disc = disc_offsets(spot_radius);
        for k in 0..grid.m * grid.m {
            let (cx, cy) = grid.center(k);
            let bit = scheduled.light_bit(k) as i8;
            for &(i, j) in &disc {
                let (x, y) = ((cx as i32 + i) as usize, (cy as i32 + j) as usize);
                spot_bits[y * dims.0 as usize + x] = bit;
            }
        }
        Ok(Self {
            width: dims.0,
            spot_bits,
        })
    }

    /// Ideal bit at (x, y); `current` is the pixel's present binarization.
    #[inline]
    pub fn at(&self, x: u32, y: u32, current: u8) -> u8 {
        match self.spot_bits[y as usize * self.width as usize + x as usize] {
            -1 => current,
            b => b as u8,
        }
    }

    #[inline]
    pub fn in_spot(&self, x: u32, y: u32) -> bool {
        self.spot_bits[y as usize * self.width as usize + x as usize] >= 0
    }
}

/// Threshold shifted by the margin towards the ideal side.
#[inline]
pub fn margin_threshold(t: f64, ideal: u8, delta: f64) -> f64 {
    if ideal == 1 {
        t + delta * (255.0 - t)
    } else {
        t - delta * t
    }
}

/// 1 if the pixel still thresholds to `ideal` under the margin.
#[inline]
pub fn pixel_robust(gray: f64, t: f64, ideal: u8, delta: f64) -> u8 {
    u8::from(psi(gray, margin_threshold(t, ideal, delta)) == ideal)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RobustnessReport {
    /// Score R of each module, row-major.
    pub scores: Vec<f64>,
    /// Modules with R < η.
    pub non_robust: Vec<usize>,
    /// Modules whose centre pixel is not robust, whatever their score.
    pub center_failures: Vec<usize>,
    /// Kernel mass lost to non-robust pixels outside spots, per module.
    pub outside_loss: Vec<f64>,
    /// Every module corrected so far.
    pub corrected_registry: BTreeSet<usize>,
    /// Correction passes performed.
    pub iterations_used: usize,
    /// |Ω| observed at each evaluation, including the final one.
    pub omega_sizes: Vec<usize>,
    /// Registry size after each correction pass.
    pub registry_sizes: Vec<usize>,
}

impl RobustnessReport {
    /// Ω together with the centre failures.
    pub fn flagged(&self) -> BTreeSet<usize> {
        self.non_robust.iter().chain(&self.center_failures).copied().collect()
    }

    /// Counts of module scores in ten equal bins over [0, 1].
    pub fn histogram(&self) -> [usize; 10] {
        let mut h = [0; 10];
        for &s in &self.scores {
            h[((s * 10.0) as usize).min(9)] += 1;
        }
        h
    }
}

/// Scores every module against the ideal bits.
pub fn evaluate(
    gray: &GrayImage,
    field: &ThresholdField,
    ideal: &IdealBitField,
    kernel: &GaussianModuleKernel,
    grid: &ModuleGrid,
    params: &RobustnessParams,
) -> Result<RobustnessReport> {
    if kernel.side() != grid.a {
        return Err(Error::InvalidParameter(format!(
            "kernel side {} differs from module size {}",
            kernel.side(),
            grid.a
        )));
    }
    check_dims(gray.dimensions(), field.dimensions())?;
    let n = grid.m * grid.m;
    let mut scores = Vec::with_capacity(n);
    let mut outside_loss = Vec::with_capacity(n);
    let mut non_robust = Vec::new();
    let mut center_failures = Vec::new();
    for k in 0..n {
        let (cx, cy) = grid.center(k);
        let mut score = 0.0;
        let mut lost = 0.0;
        for (i, j, w) in kernel.iter() {
            let (x, y) = ((cx as i32 + i) as u32, (cy as i32 + j) as u32);
            let (g, t) = (gray.get(x, y), field.at(x, y));
            let b = ideal.at(x, y, psi(g, t));
            if pixel_robust(g, t, b, params.delta) == 1 {
                score += w;
            } else if !ideal.in_spot(x, y) {
                lost += w;
            }
        }
        let (g, t) = (gray.get(cx, cy), field.at(cx, cy));
        if pixel_robust(g, t, ideal.at(cx, cy, psi(g, t)), params.delta) == 0 {
            center_failures.push(k);
        }
        if score < params.eta {
            non_robust.push(k);
        }
        scores.push(score);
        outside_loss.push(lost);
    }
    Ok(RobustnessReport {
        scores,
        non_robust,
        center_failures,
        outside_loss,
        ..Default::default()
    })
}

/// Gray value that clears the margin threshold on the ideal side.
#[inline]
fn forced_gray(t: f64, ideal: u8, params: &RobustnessParams) -> f64 {
    let tm = margin_threshold(t, ideal, params.delta);
    if ideal == 1 {
        (tm + params.slack).min(255.0)
    } else {
        (tm - 1.0 - params.slack).max(0.0)
    }
}

/// Moves every non-robust pixel of module `k` to its forced gray.
///
/// Pixels outside spots keep the side they were first pushed to, recorded
/// in `sticky`, so threshold drift cannot make them alternate.
fn force_module(
    k: usize,
    gray: &mut GrayImage,
    field: &ThresholdField,
    ideal: &IdealBitField,
    sticky: &mut [i8],
    grid: &ModuleGrid,
    params: &RobustnessParams,
) {
    let (cx, cy) = grid.center(k);
    let h = grid.half() as i32;
    let w = gray.width() as usize;
    for j in -h..=h {
        for i in -h..=h {
            let (x, y) = ((cx as i32 + i) as u32, (cy as i32 + j) as u32);
            let (g, t) = (gray.get(x, y), field.at(x, y));
            let b = ideal.at(x, y, psi(g, t));
            if pixel_robust(g, t, b, params.delta) == 1 {
                continue;
            }
            let side = &mut sticky[y as usize * w + x as usize];
            if *side < 0 {
                *side = b as i8;
            }
            let target = if ideal.in_spot(x, y) { b } else { *side as u8 };
            gray.set(x, y, forced_gray(t, target, params));
        }
    }
}

/// Output of [`correct`].
#[derive(Debug, Clone)]
pub struct Correction {
    /// Corrected gray raster.
    pub qc_gray: GrayImage,
    /// Stylized image with registered spots filled from their surroundings.
    pub qb0: ColorImage,
    pub report: RobustnessReport,
}

/// Iteratively corrects non-robust modules of `qb`.
///
/// Each pass recomputes the thresholds and evaluates. Flagged modules, and
/// those that would be flagged under δ + hysteresis, join the registry; every
/// registered module is then forced against the stricter margin. The loop
/// ends once nothing is flagged in either the corrected gray raster or its
/// 8-bit colorization. Fails with [`Error::NonConvergence`] if modules remain
/// flagged after `max_iterations` passes.
pub fn correct(
    qb: &ColorImage,
    scheduled: &QrMatrix,
    grid: &ModuleGrid,
    kernel: &GaussianModuleKernel,
    params: &RobustnessParams,
) -> Result<Correction> {
    params.validate(grid)?;
    let mut gray = to_gray(qb);
    let ideal = IdealBitField::new(scheduled, grid, params.spot_radius, gray.dimensions())?;
    let mut sticky = vec![-1i8; gray.data().len()];
    let mut registry = BTreeSet::new();
    let mut omega_sizes = Vec::new();
    let mut registry_sizes = Vec::new();
    let strict = RobustnessParams {
        delta: (params.delta + params.hysteresis).min(1.0),
        ..*params
    };
    let mut iteration = 0;
    loop {
        let field = binarize_field(&gray);
        let mut report = evaluate(&gray, &field, &ideal, kernel, grid, params)?;
        omega_sizes.push(report.non_robust.len());
        let mut flagged = report.flagged();
        log::debug!(
            "pass {iteration}: |omega| = {}, centre failures = {}",
            report.non_robust.len(),
            report.center_failures.len()
        );
        if flagged.is_empty() {
            // The 8-bit colorized result must pass as well.
            let qb0 = preprocess_spots(qb, &registry, grid, params.spot_radius)?;
            let quantized = to_gray(&colorize(&gray, &qb0)?);
            let qfield = binarize_field(&quantized);
            flagged = evaluate(&quantized, &qfield, &ideal, kernel, grid, params)?.flagged();
            if flagged.is_empty() {
                report.corrected_registry = registry;
                report.iterations_used = iteration;
                report.omega_sizes = omega_sizes;
                report.registry_sizes = registry_sizes;
                return Ok(Correction {
                    qc_gray: gray,
                    qb0,
                    report,
                });
            }
            log::debug!("pass {iteration}: {} modules fail after colorizing", flagged.len());
        }
        if iteration == params.max_iterations {
            return Err(Error::NonConvergence {
                iterations: iteration,
                remaining: flagged.len(),
            });
        }
        registry.extend(flagged);
        registry.extend(evaluate(&gray, &field, &ideal, kernel, grid, &strict)?.flagged());
        registry_sizes.push(registry.len());
        for &k in &registry {
            force_module(k, &mut gray, &field, &ideal, &mut sticky, grid, &strict);
        }
        iteration += 1;
    }
}

/// Fills the spot of every registered module with the mean color of the ring
/// just outside it, read from `qb`.
pub fn preprocess_spots(
    qb: &ColorImage,
    registry: &BTreeSet<usize>,
    grid: &ModuleGrid,
    spot_radius: u32,
) -> Result<ColorImage> {
    grid.check_radius(spot_radius)?;
    let (w, h) = qb.dimensions();
    let disc = disc_offsets(spot_radius);
    let ring = ring_offsets(spot_radius);
    let mut out = qb.clone();
    for &k in registry {
        if k >= grid.m * grid.m {
            return Err(Error::InvalidParameter(format!("module {k} outside the grid")));
        }
        let (cx, cy) = grid.center(k);
        let mut sum = [0.0f64; 3];
        let mut count = 0usize;
        for &(i, j) in &ring {
            let (x, y) = (cx as i64 + i as i64, cy as i64 + j as i64);
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                continue;
            }
            let px = qb.get_pixel(x as u32, y as u32).0;
            for c in 0..3 {
                sum[c] += px[c] as f64;
            }
            count += 1;
        }
        if count == 0 {
            continue;
        }
        let avg = Rgb(sum.map(|s| (s / count as f64).round() as u8));
        for &(i, j) in &disc {
            out.put_pixel((cx as i32 + i) as u32, (cy as i32 + j) as u32, avg);
        }
    }
    Ok(out)
}

/// Recolors `qc_gray` using the hues of `qb0`.
///
/// Each pixel of `qb0` is scaled so its gray matches the target. Pixels that
/// are black in `qb0`, or whose clipped result misses the target by more than
/// one gray level, become achromatic.
pub fn colorize(qc_gray: &GrayImage, qb0: &ColorImage) -> Result<ColorImage> {
    check_dims(qc_gray.dimensions(), qb0.dimensions())?;
    let mut out = qb0.clone();
    for (x, y, px) in out.enumerate_pixels_mut() {
        *px = colorize_pixel(qc_gray.get(x, y), px.0);
    }
    Ok(out)
}

pub fn colorize_pixel(target: f64, src: [u8; 3]) -> Rgb<u8> {
    let target = target.clamp(0.0, 255.0);
    let g0 = luma(src);
    let achromatic = || {
        let v = target.round() as u8;
        Rgb([v, v, v])
    };
    if g0 == 0.0 {
        return achromatic();
    }
    let theta = target / g0;
    let scaled = src.map(|c| (theta * c as f64).round().clamp(0.0, 255.0) as u8);
    if (luma(scaled) - target).abs() > 1.0 {
        achromatic()
    } else {
        Rgb(scaled)
    }
}
