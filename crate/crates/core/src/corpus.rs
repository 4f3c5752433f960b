//! Deterministic synthetic test images.
//!
//! Each index picks one of several generators (colour blobs, value noise,
//! shapes, sinusoid patterns, a simple landscape) and a seed, so the same
//! index always yields the same 512×512 image.

use image::Rgb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::ColorImage;

pub const CORPUS_SIDE: u32 = 512;
pub const KINDS: usize = 5;

fn rng_for(index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + index as u64)
}

fn random_color(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [
        rng.gen_range(0.0..255.0),
        rng.gen_range(0.0..255.0),
        rng.gen_range(0.0..255.0),
    ]
}

fn to_px(c: [f64; 3]) -> Rgb<u8> {
    Rgb(c.map(|v| v.round().clamp(0.0, 255.0) as u8))
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i] + (b[i] - a[i]) * t)
}

fn blobs(rng: &mut ChaCha8Rng, side: u32) -> ColorImage {
    let base = random_color(rng);
    let blobs: Vec<([f64; 2], f64, [f64; 3])> = (0..rng.gen_range(3..7))
        .map(|_| {
            (
                [rng.gen_range(0.0..side as f64), rng.gen_range(0.0..side as f64)],
                rng.gen_range(40.0..160.0),
                random_color(rng),
            )
        })
        .collect();
    ColorImage::from_fn(side, side, |x, y| {
        let mut c = base;
        for (centre, radius, color) in &blobs {
            let d2 = (x as f64 - centre[0]).powi(2) + (y as f64 - centre[1]).powi(2);
            c = lerp(c, *color, (-d2 / (2.0 * radius * radius)).exp());
        }
        to_px(c)
    })
}

fn value_noise(rng: &mut ChaCha8Rng, side: u32) -> ColorImage {
    let (lo, hi) = (random_color(rng), random_color(rng));
    let octaves: Vec<(usize, Vec<f64>)> = [4usize, 8, 16, 32]
        .iter()
        .map(|&cells| {
            (
                cells,
                (0..(cells + 1) * (cells + 1)).map(|_| rng.gen::<f64>()).collect(),
            )
        })
        .collect();
    ColorImage::from_fn(side, side, |x, y| {
        let mut v = 0.0;
        let mut amp = 0.5;
        for (cells, lattice) in &octaves {
            let fx = x as f64 / side as f64 * *cells as f64;
            let fy = y as f64 / side as f64 * *cells as f64;
            let (ix, iy) = (fx as usize, fy as usize);
            let (tx, ty) = (fx - ix as f64, fy - iy as f64);
            let at = |i: usize, j: usize| lattice[j * (cells + 1) + i];
            let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
            let bottom = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
            v += amp * (top * (1.0 - ty) + bottom * ty);
            amp /= 2.0;
        }
        to_px(lerp(lo, hi, v / 0.9375))
    })
}

fn shapes(rng: &mut ChaCha8Rng, side: u32) -> ColorImage {
    let (top, bottom) = (random_color(rng), random_color(rng));
    let mut img = ColorImage::from_fn(side, side, |_, y| to_px(lerp(top, bottom, y as f64 / side as f64)));
    for _ in 0..rng.gen_range(4..10) {
        let color = to_px(random_color(rng));
        let cx = rng.gen_range(0..side) as i64;
        let cy = rng.gen_range(0..side) as i64;
        let size = rng.gen_range(30..150) as i64;
        let circle = rng.gen_bool(0.5);
        for y in (cy - size).max(0)..(cy + size).min(side as i64) {
            for x in (cx - size).max(0)..(cx + size).min(side as i64) {
                let inside = !circle || (x - cx).pow(2) + (y - cy).pow(2) <= size * size;
                if inside {
                    img.put_pixel(x as u32, y as u32, color);
                }
            }
        }
    }
    img
}

fn waves(rng: &mut ChaCha8Rng, side: u32) -> ColorImage {
    let (a, b) = (random_color(rng), random_color(rng));
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let freq: f64 = rng.gen_range(0.01..0.06);
    let freq2: f64 = rng.gen_range(0.002..0.01);
    ColorImage::from_fn(side, side, |x, y| {
        let u = x as f64 * angle.cos() + y as f64 * angle.sin();
        let v = -(x as f64) * angle.sin() + y as f64 * angle.cos();
        let t = 0.5 + 0.35 * (u * freq).sin() + 0.15 * (v * freq2).cos();
        to_px(lerp(a, b, t.clamp(0.0, 1.0)))
    })
}

fn landscape(rng: &mut ChaCha8Rng, side: u32) -> ColorImage {
    let sky_top = [
        rng.gen_range(20.0..120.0),
        rng.gen_range(60.0..160.0),
        rng.gen_range(150.0..255.0),
    ];
    let sky_low = [
        rng.gen_range(180.0..255.0),
        rng.gen_range(150.0..230.0),
        rng.gen_range(120.0..220.0),
    ];
    let ground = [
        rng.gen_range(20.0..90.0),
        rng.gen_range(60.0..140.0),
        rng.gen_range(10.0..70.0),
    ];
    let horizon = rng.gen_range(0.45..0.7) * side as f64;
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let sun = [
        rng.gen_range(0.2..0.8) * side as f64,
        rng.gen_range(0.1..0.3) * side as f64,
    ];
    let sun_r = rng.gen_range(25.0..60.0);
    ColorImage::from_fn(side, side, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let ridge = horizon + 30.0 * (xf * 0.015 + phase).sin() + 12.0 * (xf * 0.05).cos();
        if yf > ridge {
            let depth = ((yf - ridge) / (side as f64 - ridge + 1.0)).min(1.0);
            to_px(lerp(ground, [10.0, 25.0, 10.0], depth))
        } else if (xf - sun[0]).powi(2) + (yf - sun[1]).powi(2) < sun_r * sun_r {
            Rgb([255, 236, 150])
        } else {
            to_px(lerp(sky_top, sky_low, (yf / ridge).min(1.0)))
        }
    })
}

/// Synthetic corpus image `index`, [`CORPUS_SIDE`] pixels square.
pub fn corpus_image(index: usize) -> ColorImage {
    let mut rng = rng_for(index);
    let side = CORPUS_SIDE;
    match index % KINDS {
        0 => blobs(&mut rng, side),
        1 => value_noise(&mut rng, side),
        2 => shapes(&mut rng, side),
        3 => waves(&mut rng, side),
        _ => landscape(&mut rng, side),
    }
}

/// The first `n` corpus images.
pub fn corpus(n: usize) -> Vec<ColorImage> {
    (0..n).map(corpus_image).collect()
}
