use artqr::aesthetic::{compute_plan, schedule, SchedulingBasis};
use artqr::corpus::corpus_image;
use artqr::grid::GaussianModuleKernel;
use artqr::pipeline::{generate, GenerateOptions};
use artqr::qr::{build_matrix, encode_message, read_matrix, EcLevel, Version};
use artqr::raster::{resample_square, to_gray, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W_M: f64 = 255.0;

/// Per-pixel energy term as a function of the pixel weight.
fn energy(w: f64, qs: f64, i: f64, g: f64) -> f64 {
    (qs - i).powi(2) * g + (W_M - (w + (qs - i).abs() * g)).powi(2)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    while hi - lo > 1e-9 {
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - r * (hi - lo);
        d = lo + r * (hi - lo);
    }
    (lo + hi) / 2.0
}

fn own_kernel(a: u32) -> Vec<f64> {
    let s = (a - 1) as f64 / 6.0;
    let h = (a / 2) as i32;
    let mut w: Vec<f64> = (-h..=h)
        .flat_map(|j| (-h..=h).map(move |i| (-((i * i + j * j) as f64) / (2.0 * s * s)).exp()))
        .collect();
    let t: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= t);
    w
}

#[test]
fn closed_form_priority_orders_modules_like_the_energy_minimum() {
    let a = 9;
    let m = 25;
    let frame = encode_message(b"order", Version::new(2).unwrap(), EcLevel::L).unwrap();
    let layout = build_matrix(&frame, 0);
    let kernel = GaussianModuleKernel::new(a).unwrap();
    let g = own_kernel(a);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..3 {
        let img = GrayImage::from_fn(m * a, m * a, |_, _| rng.gen_range(0.0..255.0));
        let plan = compute_plan(&img, &kernel, &layout).unwrap();
        let numeric: Vec<f64> = (0..(m * m) as usize)
            .map(|k| {
                let (r, c) = ((k / m as usize) as u32, (k % m as usize) as u32);
                let qs = 255.0 * plan.targets[k] as f64;
                let mut sum = 0.0;
                for j in 0..a {
                    for i in 0..a {
                        let x = img.get(c * a + i, r * a + j);
                        let gx = g[(j * a + i) as usize];
                        sum += golden_min(|w| energy(w, qs, x, gx), -2.0 * W_M, 2.0 * W_M);
                    }
                }
                sum / W_M
            })
            .collect();
        let n = numeric.len();
        for p in 0..n {
            for q in p + 1..n {
                let dp = plan.priorities[p] - plan.priorities[q];
                if dp.abs() > 1e-6 {
                    assert_eq!(dp > 0.0, numeric[p] > numeric[q], "modules {p} and {q}");
                }
            }
        }
    }
}

#[test]
fn weighted_mean_matches_direct_sum() {
    let frame = encode_message(b"mean", Version::new(5).unwrap(), EcLevel::L).unwrap();
    let layout = build_matrix(&frame, 0);
    let kernel = GaussianModuleKernel::new(13).unwrap();
    let g = own_kernel(13);
    let img = to_gray(&resample_square(&corpus_image(1), 481));
    let plan = compute_plan(&img, &kernel, &layout).unwrap();
    for k in (0..37 * 37).step_by(17) {
        let (r, c) = ((k / 37) as u32, (k % 37) as u32);
        let mut sum = 0.0;
        for j in 0..13 {
            for i in 0..13 {
                sum += img.get(c * 13 + i, r * 13 + j) * g[(j * 13 + i) as usize];
            }
        }
        assert!((plan.mean_gray[k] - sum).abs() < 1e-9);
        assert_eq!(plan.targets[k], (sum / 255.0).round() as u8);
    }
}

#[test]
fn scaling_priorities_leaves_schedule_unchanged() {
    let frame = encode_message(b"scale invariance", Version::new(5).unwrap(), EcLevel::L).unwrap();
    let layout = build_matrix(&frame, 5);
    let kernel = GaussianModuleKernel::new(13).unwrap();
    let img = to_gray(&resample_square(&corpus_image(9), 481));
    let plan = compute_plan(&img, &kernel, &layout).unwrap();
    let base = schedule(&frame, &plan, &layout).unwrap();
    for factor in [0.25, 3.7, 1e6] {
        let mut scaled = plan.clone();
        scaled.priorities.iter_mut().for_each(|p| *p *= factor);
        assert_eq!(schedule(&frame, &scaled, &layout).unwrap().matrix, base.matrix);
    }
}

/// Rank over GF(2) by plain Gaussian elimination on bit vectors.
fn gf2_rank(rows: &[Vec<bool>]) -> usize {
    let mut rows: Vec<Vec<bool>> = rows.to_vec();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

fn seq_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|b| (0..8).map(move |i| b >> (7 - i) & 1 == 1))
        .collect()
}

#[test]
fn basis_rows_are_codeword_differences_with_full_rank() {
    let frame = encode_message(b"rank check", Version::new(5).unwrap(), EcLevel::L).unwrap();
    let basis = SchedulingBasis::from_frame(&frame);
    let base = seq_bits(&frame.interleaved());
    let total = frame.blocks().total_codewords * 8;
    let mut rows = Vec::new();
    for (i, &p) in basis.free_bits.iter().enumerate() {
        let mut f = frame.clone();
        f.flip_data_bit(p);
        f.recompute_ec();
        let diff: Vec<bool> = seq_bits(&f.interleaved())
            .iter()
            .zip(&base)
            .map(|(a, b)| a ^ b)
            .collect();
        let row: Vec<bool> = (0..total).map(|q| basis.rows[i].get(q)).collect();
        assert_eq!(row, diff);
        rows.push(row);
    }
    assert_eq!(gf2_rank(&rows), basis.free_bits.len());
}

#[test]
fn corpus_schedules_are_valid_and_beneficial() {
    for i in 0..6 {
        for mask in [0, 6] {
            let opts = GenerateOptions {
                mask,
                ..GenerateOptions::default()
            };
            let g = generate(b"https://example.org/a", &corpus_image(i), &opts).unwrap();
            let s = &g.scheduled;
            let (fixed, corrections) = read_matrix(&s.matrix).unwrap().corrected().unwrap();
            assert_eq!(corrections, 0);
            assert_eq!(fixed.payload().unwrap(), b"https://example.org/a");
            assert!(g.plan.match_count(&s.matrix) >= g.plan.match_count(&g.unscheduled));
            assert_eq!(s.basis.consumed(), s.basis.free_bits.len());
            for p in &s.basis.pivot_log {
                assert_eq!(s.matrix.light_bit(p.module), g.plan.targets[p.module]);
            }
        }
    }
}

#[test]
fn pivots_follow_priority_order() {
    let g = generate(b"ordered", &corpus_image(11), &GenerateOptions::default()).unwrap();
    let pr: Vec<f64> = g
        .scheduled
        .basis
        .pivot_log
        .iter()
        .map(|p| g.plan.priorities[p.module])
        .collect();
    assert!(pr.windows(2).all(|w| w[0] >= w[1]));
}
