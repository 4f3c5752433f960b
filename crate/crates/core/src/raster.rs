//! Pixel rasters: 8-bit RGB images and real-valued gray images.

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};

use crate::error::{Error, Result};

/// 8-bit RGB raster.
pub type ColorImage = RgbImage;

/// Luma weights for R, G and B.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Gray raster with real-valued pixels, nominally in [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, fill: f64) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> f64) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f64) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rounds to 8 bits and replicates into all three channels.
    pub fn to_color(&self) -> ColorImage {
        RgbImage::from_fn(self.width, self.height, |x, y| {
            let v = self.get(x, y).round().clamp(0.0, 255.0) as u8;
            Rgb([v, v, v])
        })
    }
}

/// Gray value of one RGB pixel, unrounded.
#[inline]
pub fn luma(px: [u8; 3]) -> f64 {
    LUMA[0] * px[0] as f64 + LUMA[1] * px[1] as f64 + LUMA[2] * px[2] as f64
}

/// Gray version of a color raster, kept real-valued.
pub fn to_gray(image: &ColorImage) -> GrayImage {
    GrayImage::from_fn(image.width(), image.height(), |x, y| luma(image.get_pixel(x, y).0))
}

/// Bilinear resample to a `side`×`side` square.
pub fn resample_square(image: &ColorImage, side: u32) -> ColorImage {
    if image.dimensions() == (side, side) {
        return image.clone();
    }
    imageops::resize(image, side, side, FilterType::Triangle)
}

/// Surrounds `core` with a white border `border` pixels wide.
pub fn add_quiet_zone(core: &ColorImage, border: u32) -> ColorImage {
    let (w, h) = core.dimensions();
    let mut out = RgbImage::from_pixel(w + 2 * border, h + 2 * border, Rgb([255, 255, 255]));
    imageops::replace(&mut out, core, border as i64, border as i64);
    out
}

/// Crops the `width`×`height` region at (`x`, `y`).
pub fn crop(image: &ColorImage, x: u32, y: u32, width: u32, height: u32) -> Result<ColorImage> {
    let (w, h) = image.dimensions();
    if x + width > w || y + height > h {
        return Err(Error::DimensionMismatch {
            expected: (x + width, y + height),
            found: (w, h),
        });
    }
    Ok(imageops::crop_imm(image, x, y, width, height).to_image())
}

pub(crate) fn check_dims(expected: (u32, u32), found: (u32, u32)) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
