//! Quality and robustness measurements: SSIM, error-module counts and
//! decode-rate trials under simulated capture distortions.

use image::imageops::{self, FilterType};
use image::Rgb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::decoder::{binarize_field, decode_check, sample};
use crate::error::{Error, Result};
use crate::grid::ModuleGrid;
use crate::qr::{ModuleRole, QrMatrix};
use crate::raster::{check_dims, to_gray, ColorImage, GrayImage};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const DYNAMIC_RANGE: f64 = 255.0;

/// Normalised 1-D Gaussian taps of the SSIM window.
pub fn ssim_taps() -> [f64; SSIM_WINDOW] {
    let h = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - h;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = taps.iter().sum();
    taps.map(|t| t / total)
}

/// Separable "valid" filtering of a row-major raster.
fn filter_valid(data: &[f64], w: usize, h: usize, taps: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = taps.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let src = &data[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().zip(&src[x..x + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..n).map(|k| taps[k] * rows[(y + k) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Mean SSIM over all fully contained 11×11 Gaussian windows.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims(a.dimensions(), b.dimensions())?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels"
        )));
    }
    let taps = ssim_taps();
    let (x, y) = (a.data(), b.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let (mx, _, _) = filter_valid(x, w, h, &taps);
    let (my, _, _) = filter_valid(y, w, h, &taps);
    let (sxx, _, _) = filter_valid(&xx, w, h, &taps);
    let (syy, _, _) = filter_valid(&yy, w, h, &taps);
    let (sxy, _, _) = filter_valid(&xy, w, h, &taps);
    let c1 = (K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (K2 * DYNAMIC_RANGE).powi(2);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// Data modules whose sampled bit differs from the scheduled symbol, at δ = 0.
pub fn error_module_count(image: &ColorImage, scheduled: &QrMatrix, grid: &ModuleGrid) -> Result<usize> {
    let gray = to_gray(image);
    let sampled = sample(&gray, &binarize_field(&gray), grid)?;
    Ok((0..grid.m * grid.m)
        .filter(|&k| scheduled.role(k) == ModuleRole::DataEc)
        .filter(|&k| sampled.bits[k] != scheduled.light_bit(k))
        .count())
}

/// Simulated capture conditions.
///
/// Brightness, gamma and scale are applied as given. Each trial draws its
/// shear angle uniformly from ±`tilt_degrees` and fresh Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec {
    /// Added to every channel.
    pub brightness_shift: f64,
    /// Exponent applied to normalised channel values.
    pub gamma: f64,
    /// Down-scale ratio of the bilinear down/up round trip; 1 disables it.
    pub scale_factor: f64,
    /// Largest horizontal shear angle.
    pub tilt_degrees: f64,
    /// Standard deviation of additive per-pixel noise.
    pub noise_sigma: f64,
}

impl Default for DistortionSpec {
    fn default() -> Self {
        Self {
            brightness_shift: 0.0,
            gamma: 1.0,
            scale_factor: 1.0,
            tilt_degrees: 0.0,
            noise_sigma: 0.0,
        }
    }
}

impl DistortionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.brightness_shift.abs() <= 255.0
            && self.gamma > 0.0
            && self.gamma <= 10.0
            && self.scale_factor > 0.0
            && self.scale_factor <= 1.0
            && (0.0..=10.0).contains(&self.tilt_degrees)
            && (0.0..=64.0).contains(&self.noise_sigma);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("distortion out of range: {self:?}")))
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }
}

impl std::str::FromStr for DistortionSpec {
    type Err = Error;

    /// Comma-separated `key=value` pairs: brightness, gamma, scale, tilt, noise.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got {part:?}")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number in {part:?}")))?;
            match key.trim() {
                "brightness" => spec.brightness_shift = v,
                "gamma" => spec.gamma = v,
                "scale" => spec.scale_factor = v,
                "tilt" => spec.tilt_degrees = v,
                "noise" => spec.noise_sigma = v,
                other => return Err(Error::InvalidParameter(format!("unknown distortion {other:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn bilinear(img: &ColorImage, x: f64, y: f64) -> [f64; 3] {
    let (w, h) = img.dimensions();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as u32, y.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    let p = |xx, yy| img.get_pixel(xx, yy).0.map(f64::from);
    let (a, b, c, d) = (p(x0, y0), p(x1, y0), p(x0, y1), p(x1, y1));
    [0, 1, 2].map(|i| (a[i] * (1.0 - tx) + b[i] * tx) * (1.0 - ty) + (c[i] * (1.0 - tx) + d[i] * tx) * ty)
}

/// Applies one random draw of `spec` to `image`.
pub fn distort(image: &ColorImage, spec: &DistortionSpec, rng: &mut impl Rng) -> Result<ColorImage> {
    spec.validate()?;
    let (w, h) = image.dimensions();
    let mut img = image.clone();

    if spec.scale_factor < 1.0 {
        let sw = ((w as f64 * spec.scale_factor).round() as u32).max(1);
        let sh = ((h as f64 * spec.scale_factor).round() as u32).max(1);
        let small = imageops::resize(&img, sw, sh, FilterType::Triangle);
        img = imageops::resize(&small, w, h, FilterType::Triangle);
    }

    let angle = if spec.tilt_degrees > 0.0 {
        rng.gen_range(-spec.tilt_degrees..=spec.tilt_degrees)
    } else {
        0.0
    };
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("validated sigma"))
    } else {
        None
    };
    let shear = angle.to_radians().tan();
    let cy = (h as f64 - 1.0) / 2.0;

    let mut out = ColorImage::new(w, h);
    for (x, y, px) in out.enumerate_pixels_mut() {
        let src = if shear != 0.0 {
            bilinear(&img, x as f64 - shear * (y as f64 - cy), y as f64)
        } else {
            img.get_pixel(x, y).0.map(f64::from)
        };
        let n = noise.map_or(0.0, |d| d.sample(rng));
        *px = Rgb(src.map(|v| {
            let v = if spec.gamma == 1.0 {
                v
            } else {
                255.0 * (v / 255.0).powf(spec.gamma)
            };
            let v = v + spec.brightness_shift + n;
            v.round().clamp(0.0, 255.0) as u8
        }));
    }
    Ok(out)
}

/// Outcome of a batch of distorted decodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialReport {
    pub outcomes: Vec<bool>,
}

impl TrialReport {
    pub fn successes(&self) -> usize {
        self.outcomes.iter().filter(|&&ok| ok).count()
    }

    pub fn rate(&self) -> f64 {
        self.successes() as f64 / self.outcomes.len() as f64
    }
}

/// Decodes `trials` independent distortions of `image`; a trial succeeds
/// when the decoded payload equals `payload`. Trial `i` uses its own
/// generator seeded from `seed` and `i`.
pub fn decode_rate_trial(
    image: &ColorImage,
    grid: &ModuleGrid,
    mask: u8,
    payload: &[u8],
    spec: &DistortionSpec,
    trials: usize,
    seed: u64,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    spec.validate()?;
    let mut outcomes = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let distorted = distort(image, spec, &mut rng)?;
        let ok = matches!(decode_check(&distorted, grid, mask), Ok(d) if d.payload == payload);
        log::debug!("trial {i}: {}", if ok { "decoded" } else { "failed" });
        outcomes.push(ok);
    }
    Ok(TrialReport { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise_image(seed: u64, w: u32, h: u32) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0))
    }

    #[test]
    fn ssim_identical_is_one() {
        let a = noise_image(1, 40, 30);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_inverted_binary_is_negative() {
        let a = GrayImage::from_fn(48, 48, |x, y| if (x / 4 + y / 4) % 2 == 0 { 0.0 } else { 255.0 });
        let b = a.map(|v| 255.0 - v);
        assert!(ssim(&a, &b).unwrap() < 0.0);
    }

    #[test]
    fn ssim_rejects_mismatch_and_tiny() {
        assert!(ssim(&GrayImage::new(20, 20, 0.0), &GrayImage::new(21, 20, 0.0)).is_err());
        assert!(ssim(&GrayImage::new(10, 10, 0.0), &GrayImage::new(10, 10, 0.0)).is_err());
    }

    #[test]
    fn taps_sum_to_one() {
        assert!((ssim_taps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distortion_spec_parsing() {
        let s: DistortionSpec = "brightness=-40, scale=0.6,noise=2".parse().unwrap();
        assert_eq!(s.brightness_shift, -40.0);
        assert_eq!(s.scale_factor, 0.6);
        assert_eq!(s.noise_sigma, 2.0);
        assert!("".parse::<DistortionSpec>().unwrap().is_identity());
        assert!("zoom=2".parse::<DistortionSpec>().is_err());
        assert!("scale=1.5".parse::<DistortionSpec>().is_err());
        assert!("tilt=20".parse::<DistortionSpec>().is_err());
    }

    #[test]
    fn identity_distortion_is_exact() {
        let img = ColorImage::from_fn(30, 20, |x, y| Rgb([x as u8 * 8, y as u8 * 9, 77]));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(distort(&img, &DistortionSpec::default(), &mut rng).unwrap(), img);
    }

    #[test]
    fn brightness_and_gamma() {
        let img = ColorImage::from_pixel(4, 4, Rgb([100, 250, 0]));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = DistortionSpec {
            brightness_shift: 10.0,
            ..Default::default()
        };
        assert_eq!(
            distort(&img, &spec, &mut rng).unwrap().get_pixel(1, 1).0,
            [110, 255, 10]
        );
        let spec = DistortionSpec {
            gamma: 2.0,
            ..Default::default()
        };
        // 255 · (100/255)² = 39.2
        assert_eq!(distort(&img, &spec, &mut rng).unwrap().get_pixel(0, 0).0, [39, 245, 0]);
    }

    #[test]
    fn shear_moves_rows_in_opposite_directions() {
        let img = ColorImage::from_fn(101, 101, |x, _| Rgb([if x < 50 { 0 } else { 255 }; 3]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = DistortionSpec {
            tilt_degrees: 10.0,
            ..Default::default()
        };
        let out = distort(&img, &spec, &mut rng).unwrap();
        let edge = |y: u32| (0..101).find(|&x| out.get_pixel(x, y).0[0] > 127).unwrap() as i32;
        assert_eq!(edge(50), 50);
        assert_ne!(edge(0), edge(100));
        assert_eq!((edge(0) - 50).signum(), -(edge(100) - 50).signum());
    }
}
