//! End-to-end helpers: Stage A generation and Stage C correction with colorization.

use crate::aesthetic::{compose_qa, compute_plan, schedule, PriorityPlan, Scheduled};
use crate::correction::{colorize, correct, Correction, RobustnessParams};
use crate::error::{Error, Result};
use crate::grid::{GaussianModuleKernel, ModuleGrid};
use crate::qr::{build_matrix, encode_message, EcLevel, QrMatrix, Version};
use crate::raster::{resample_square, to_gray, ColorImage};

pub const DEFAULT_MODULE_PX: u32 = 13;
pub const QUIET_ZONE_MODULES: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub version: Version,
    pub ec_level: EcLevel,
    pub mask: u8,
    /// Pixels per module side (odd).
    pub module_px: u32,
    /// Spot radius; ⌊module_px/4⌋ when `None`.
    pub spot_radius: Option<u32>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            version: Version::DEFAULT,
            ec_level: EcLevel::L,
            mask: 0,
            module_px: DEFAULT_MODULE_PX,
            spot_radius: None,
        }
    }
}

/// Everything Stage A produces.
#[derive(Debug, Clone)]
pub struct Generated {
    pub grid: ModuleGrid,
    pub spot_radius: u32,
    /// Input image resampled to the grid.
    pub blended: ColorImage,
    pub plan: PriorityPlan,
    /// Symbol before scheduling.
    pub unscheduled: QrMatrix,
    pub scheduled: Scheduled,
    pub qa: ColorImage,
}

/// Encodes `message` and blends it into `image`.
pub fn generate(message: &[u8], image: &ColorImage, opts: &GenerateOptions) -> Result<Generated> {
    if opts.mask > 7 {
        return Err(Error::InvalidParameter(format!("mask {} out of range", opts.mask)));
    }
    let grid = ModuleGrid::new(opts.module_px, opts.version.size())?;
    let spot_radius = opts.spot_radius.unwrap_or(grid.default_spot_radius());
    grid.check_radius(spot_radius)?;
    let kernel = GaussianModuleKernel::new(opts.module_px)?;
    let frame = encode_message(message, opts.version, opts.ec_level)?;
    let unscheduled = build_matrix(&frame, opts.mask);
    let blended = resample_square(image, grid.side());
    let plan = compute_plan(&to_gray(&blended), &kernel, &unscheduled)?;
    let scheduled = schedule(&frame, &plan, &unscheduled)?;
    let qa = compose_qa(&blended, &scheduled.matrix, &grid, spot_radius)?;
    Ok(Generated {
        grid,
        spot_radius,
        blended,
        plan,
        unscheduled,
        scheduled,
        qa,
    })
}

/// Stage C output: the correction record plus the colorized image.
#[derive(Debug, Clone)]
pub struct Corrected {
    pub correction: Correction,
    pub qc: ColorImage,
}

/// Runs [`correct`] and colorizes the result.
pub fn stage_c(
    qb: &ColorImage,
    scheduled: &QrMatrix,
    grid: &ModuleGrid,
    params: &RobustnessParams,
) -> Result<Corrected> {
    let kernel = GaussianModuleKernel::new(grid.a)?;
    let correction = correct(qb, scheduled, grid, &kernel, params)?;
    let qc = colorize(&correction.qc_gray, &correction.qb0)?;
    Ok(Corrected { correction, qc })
}
