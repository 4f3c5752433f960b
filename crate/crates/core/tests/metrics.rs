use artqr::corpus::corpus_image;
use artqr::decoder::{binarize_field, decode_check, sample};
use artqr::metrics::{decode_rate_trial, error_module_count, ssim, DistortionSpec};
use artqr::pipeline::{generate, GenerateOptions, Generated};
use artqr::qr::{read_matrix, ModuleRole, QrMatrix};
use artqr::raster::{to_gray, ColorImage, GrayImage};
use image::Rgb;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean SSIM computed window by window with two-pass moments.
fn ssim_direct(a: &GrayImage, b: &GrayImage) -> f64 {
    let n = 11usize;
    let g: Vec<f64> = (0..n).map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp()).collect();
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            w[j * n + i] = g[i] * g[j];
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let (width, height) = a.dimensions();
    let mut sum = 0.0;
    let mut count = 0;
    for y0 in 0..=height - n as u32 {
        for x0 in 0..=width - n as u32 {
            let px = |img: &GrayImage, k: usize| img.get(x0 + (k % n) as u32, y0 + (k / n) as u32);
            let mx: f64 = (0..n * n).map(|k| w[k] * px(a, k)).sum();
            let my: f64 = (0..n * n).map(|k| w[k] * px(b, k)).sum();
            let vx: f64 = (0..n * n).map(|k| w[k] * (px(a, k) - mx).powi(2)).sum();
            let vy: f64 = (0..n * n).map(|k| w[k] * (px(b, k) - my).powi(2)).sum();
            let cxy: f64 = (0..n * n).map(|k| w[k] * (px(a, k) - mx) * (px(b, k) - my)).sum();
            sum += (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / count as f64
}

#[test]
fn ssim_matches_direct_window_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..5 {
        let a = GrayImage::from_fn(36, 29, |_, _| rng.gen_range(0.0..255.0));
        let b = GrayImage::from_fn(36, 29, |x, y| {
            (a.get(x, y) * 0.6 + rng.gen_range(0.0..100.0)).min(255.0)
        });
        let fast = ssim(&a, &b).unwrap();
        let direct = ssim_direct(&a, &b);
        assert!((fast - direct).abs() <= 1e-6, "{fast} vs {direct}");
        assert!((fast - ssim(&b, &a).unwrap()).abs() <= 1e-9);
    }
}

fn generated(i: usize) -> Generated {
    generate(b"metrics fixture", &corpus_image(i), &GenerateOptions::default()).unwrap()
}

fn invert_spot(img: &mut ColorImage, g: &Generated, k: usize) {
    let (cx, cy) = g.grid.center(k);
    let r = g.spot_radius as i32;
    for j in -r..=r {
        for i in -r..=r {
            if i * i + j * j <= r * r {
                let (x, y) = ((cx as i32 + i) as u32, (cy as i32 + j) as u32);
                let p = img.get_pixel(x, y).0;
                img.put_pixel(x, y, Rgb(p.map(|v| 255 - v)));
            }
        }
    }
}

fn data_modules(m: &QrMatrix) -> Vec<usize> {
    (0..m.m * m.m).filter(|&k| m.role(k) == ModuleRole::DataEc).collect()
}

#[test]
fn one_inverted_spot_counts_once() {
    let g = generated(3);
    let m = &g.scheduled.matrix;
    assert_eq!(error_module_count(&g.qa, m, &g.grid).unwrap(), 0);
    let k = data_modules(m)[400];
    let mut img = g.qa.clone();
    invert_spot(&mut img, &g, k);
    assert_eq!(error_module_count(&img, m, &g.grid).unwrap(), 1);
}

/// Codewords that differ between the sampled symbol and the scheduled one.
fn codeword_errors(img: &ColorImage, g: &Generated) -> usize {
    let gray = to_gray(img);
    let sampled = sample(&gray, &binarize_field(&gray), &g.grid).unwrap();
    let mut read = g.scheduled.matrix.clone();
    read.dark = sampled.dark_modules();
    let got = read_matrix(&read).unwrap().interleaved();
    let want = read_matrix(&g.scheduled.matrix).unwrap().interleaved();
    got.iter().zip(&want).filter(|(a, b)| a != b).count()
}

#[test]
fn rs_corrections_bounded_by_codeword_image_of_errors() {
    let g = generated(6);
    let modules = data_modules(&g.scheduled.matrix);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [1, 3, 6, 10] {
        let mut img = g.qa.clone();
        for &k in modules.choose_multiple(&mut rng, n) {
            invert_spot(&mut img, &g, k);
        }
        let errors = error_module_count(&img, &g.scheduled.matrix, &g.grid).unwrap();
        assert!(errors >= 1);
        let image = codeword_errors(&img, &g);
        assert!(image <= errors);
        let d = decode_check(&img, &g.grid, 0).unwrap();
        assert_eq!(d.payload, b"metrics fixture");
        assert!(d.corrections <= image, "{} > {image}", d.corrections);
    }
}

#[test]
fn decode_rates_are_reproducible() {
    let g = generated(2);
    let spec: DistortionSpec = "brightness=30,tilt=1,noise=4".parse().unwrap();
    let run = |seed| decode_rate_trial(&g.qa, &g.grid, 0, b"metrics fixture", &spec, 8, seed).unwrap();
    assert_eq!(run(11), run(11));
    let identity = decode_rate_trial(&g.qa, &g.grid, 0, b"metrics fixture", &DistortionSpec::default(), 5, 1).unwrap();
    assert_eq!(identity.rate(), 1.0);
}

#[test]
fn heavy_downscale_is_reported() {
    let g = generated(4);
    let spec = DistortionSpec {
        scale_factor: 0.3,
        ..Default::default()
    };
    let r = decode_rate_trial(&g.qa, &g.grid, 0, b"metrics fixture", &spec, 4, 2).unwrap();
    println!("scale 0.3 on the unstylized code: rate {:.2}", r.rate());
    assert_eq!(r.outcomes.len(), 4);
}
