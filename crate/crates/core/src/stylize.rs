//! Stylization boundary: built-in procedural stylizers and external
//! subprocess stylizers exchanging PNG files.
//!
//! External commands are invoked as `program [args..] <input.png> <output.png>`
//! and must exit 0 and keep the raster size.

use std::fmt;
use std::path::PathBuf;
use std::process::Command;
use std::str::FromStr;

use image::{imageops, Rgb};

use crate::error::{Error, Result};
use crate::raster::ColorImage;

/// Built-in stylizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Identity,
    /// Uniform quantization to `n` levels per channel.
    Posterize(u8),
    /// Gaussian blur with the given σ in pixels.
    Soften(f32),
    /// HSV hue rotation in degrees; value and saturation unchanged.
    HueRotate(f64),
    /// 4×4 Bayer ordered dither to `n` levels per channel.
    Dither(u8),
}

/// Any stylizer the gateway can run.
#[derive(Debug, Clone, PartialEq)]
pub enum Stylizer {
    Builtin(Builtin),
    External { program: PathBuf, args: Vec<String> },
}

/// Names accepted by [`Builtin::from_str`], with parameter syntax.
pub fn builtin_stylizers() -> Vec<&'static str> {
    vec![
        "identity",
        "posterize:<levels>",
        "soften:<sigma>",
        "hue:<degrees>",
        "dither:<levels>",
    ]
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Identity => write!(f, "identity"),
            Builtin::Posterize(n) => write!(f, "posterize:{n}"),
            Builtin::Soften(s) => write!(f, "soften:{s}"),
            Builtin::HueRotate(d) => write!(f, "hue:{d}"),
            Builtin::Dither(n) => write!(f, "dither:{n}"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::InvalidParameter(format!("bad stylizer spec {s:?}"));
        let levels = |default: u8| -> Result<u8> {
            let n = arg.map_or(Ok(default), |a| a.parse().map_err(|_| bad()))?;
            if n < 2 {
                return Err(bad());
            }
            Ok(n)
        };
        match name {
            "identity" if arg.is_none() => Ok(Builtin::Identity),
            "posterize" => Ok(Builtin::Posterize(levels(4)?)),
            "dither" => Ok(Builtin::Dither(levels(4)?)),
            "soften" => {
                let s: f32 = arg.map_or(Ok(2.0), |a| a.parse().map_err(|_| bad()))?;
                if !(s > 0.0 && s.is_finite()) {
                    return Err(bad());
                }
                Ok(Builtin::Soften(s))
            }
            "hue" => {
                let d: f64 = arg.map_or(Ok(120.0), |a| a.parse().map_err(|_| bad()))?;
                if !d.is_finite() {
                    return Err(bad());
                }
                Ok(Builtin::HueRotate(d))
            }
            _ => Err(bad()),
        }
    }
}

impl Stylizer {
    /// Provenance identifier.
    pub fn id(&self) -> String {
        match self {
            Stylizer::Builtin(b) => b.to_string(),
            Stylizer::External { program, args } => {
                let mut s = format!("external:{}", program.display());
                for a in args {
                    s.push(' ');
                    s.push_str(a);
                }
                s
            }
        }
    }

    /// Parses a shell-free command line: program followed by whitespace-separated args.
    pub fn external(command: &str) -> Result<Self> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty external stylizer command".into()))?;
        Ok(Stylizer::External {
            program: PathBuf::from(program),
            args: parts.map(str::to_owned).collect(),
        })
    }
}

/// Runs `stylizer` on `input` and enforces the size contract.
pub fn apply_stylizer(input: &ColorImage, stylizer: &Stylizer) -> Result<ColorImage> {
    let out = match stylizer {
        Stylizer::Builtin(b) => apply_builtin(input, *b),
        Stylizer::External { program, args } => run_external(input, program, args)?,
    };
    if out.dimensions() != input.dimensions() {
        return Err(Error::Stylizer(format!(
            "{} produced {:?}, expected {:?}",
            stylizer.id(),
            out.dimensions(),
            input.dimensions()
        )));
    }
    Ok(out)
}

pub fn apply_builtin(input: &ColorImage, b: Builtin) -> ColorImage {
    match b {
        Builtin::Identity => input.clone(),
        Builtin::Posterize(n) => map_channels(input, |v| quantize(v as f64, n)),
        Builtin::Soften(sigma) => imageops::blur(input, sigma),
        Builtin::HueRotate(deg) => {
            let mut out = input.clone();
            for px in out.pixels_mut() {
                *px = rotate_hue(*px, deg);
            }
            out
        }
        Builtin::Dither(n) => dither(input, n),
    }
}

fn map_channels(input: &ColorImage, f: impl Fn(u8) -> u8) -> ColorImage {
    let mut out = input.clone();
    for px in out.pixels_mut() {
        px.0 = px.0.map(&f);
    }
    out
}

/// Nearest of `n` evenly spaced levels in [0, 255].
fn quantize(v: f64, n: u8) -> u8 {
    let step = 255.0 / (n - 1) as f64;
    ((v / step).round().clamp(0.0, (n - 1) as f64) * step).round() as u8
}

const BAYER4: [[u8; 4]; 4] = [[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]];

fn dither(input: &ColorImage, n: u8) -> ColorImage {
    let step = 255.0 / (n - 1) as f64;
    let mut out = input.clone();
    for (x, y, px) in out.enumerate_pixels_mut() {
        let bias = (BAYER4[(y % 4) as usize][(x % 4) as usize] as f64 + 0.5) / 16.0 - 0.5;
        px.0 = px.0.map(|v| quantize(v as f64 + bias * step, n));
    }
    out
}

fn rotate_hue(px: Rgb<u8>, deg: f64) -> Rgb<u8> {
    let [r, g, b] = px.0.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let chroma = max - min;
    if chroma == 0.0 {
        return px;
    }
    let h = if max == r {
        ((g - b) / chroma).rem_euclid(6.0)
    } else if max == g {
        (b - r) / chroma + 2.0
    } else {
        (r - g) / chroma + 4.0
    };
    let h = (h + deg / 60.0).rem_euclid(6.0);
    let x = chroma * (1.0 - (h % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match h as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    Rgb([r1, g1, b1].map(|c| ((c + min) * 255.0).round().clamp(0.0, 255.0) as u8))
}

fn run_external(input: &ColorImage, program: &PathBuf, args: &[String]) -> Result<ColorImage> {
    let dir = tempfile::tempdir()?;
    let in_path = dir.path().join("input.png");
    let out_path = dir.path().join("output.png");
    input.save(&in_path)?;
    let status = Command::new(program)
        .args(args)
        .arg(&in_path)
        .arg(&out_path)
        .status()
        .map_err(|e| Error::Stylizer(format!("cannot run {}: {e}", program.display())))?;
    if !status.success() {
        return Err(Error::Stylizer(format!("{} exited with {status}", program.display())));
    }
    let out = image::open(&out_path)
        .map_err(|e| Error::Stylizer(format!("unreadable output from {}: {e}", program.display())))?;
    Ok(out.to_rgb8())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn gradient() -> ColorImage {
        ColorImage::from_fn(256, 8, |x, y| Rgb([x as u8, (255 - x) as u8, (y * 30) as u8]))
    }

    #[test]
    fn identity_is_bit_exact() {
        let img = gradient();
        assert_eq!(
            apply_stylizer(&img, &Stylizer::Builtin(Builtin::Identity)).unwrap(),
            img
        );
    }

    #[test]
    fn posterize_gradient_has_n_levels() {
        let out = apply_builtin(&gradient(), Builtin::Posterize(4));
        for c in 0..2 {
            let levels: BTreeSet<u8> = out.pixels().map(|p| p.0[c]).collect();
            assert_eq!(levels, BTreeSet::from([0, 85, 170, 255]));
        }
    }

    #[test]
    fn dither_uses_quantized_levels() {
        let out = apply_builtin(&gradient(), Builtin::Dither(2));
        assert!(out.pixels().all(|p| p.0.iter().all(|&v| v == 0 || v == 255)));
        let mid = ColorImage::from_pixel(4, 4, Rgb([128, 128, 128]));
        let d = apply_builtin(&mid, Builtin::Dither(2));
        let white = d.pixels().filter(|p| p.0[0] == 255).count();
        assert!((7..=9).contains(&white));
    }

    #[test]
    fn hue_rotation_preserves_value_and_changes_gray() {
        let px = Rgb([200, 40, 40]);
        let rotated = rotate_hue(px, 120.0);
        assert_eq!(rotated, Rgb([40, 200, 40]));
        assert_eq!(rotate_hue(Rgb([90, 90, 90]), 77.0), Rgb([90, 90, 90]));
        assert_eq!(rotate_hue(px, 360.0), px);
    }

    #[test]
    fn builtins_are_dimension_preserving_and_deterministic() {
        let img = gradient();
        for spec in ["identity", "posterize:3", "soften:2", "hue:120", "dither"] {
            let b: Builtin = spec.parse().unwrap();
            let s = Stylizer::Builtin(b);
            let a = apply_stylizer(&img, &s).unwrap();
            assert_eq!(a.dimensions(), img.dimensions());
            assert_eq!(a, apply_stylizer(&img, &s).unwrap());
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("posterize:6".parse::<Builtin>().unwrap(), Builtin::Posterize(6));
        assert_eq!("soften".parse::<Builtin>().unwrap(), Builtin::Soften(2.0));
        assert!("posterize:1".parse::<Builtin>().is_err());
        assert!("soften:-1".parse::<Builtin>().is_err());
        assert!("sepia".parse::<Builtin>().is_err());
        for b in [Builtin::Posterize(4), Builtin::HueRotate(120.0), Builtin::Dither(3)] {
            assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
        }
        assert!(builtin_stylizers().contains(&"identity"));
    }
}
