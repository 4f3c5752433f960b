use artqr::correction::{colorize_pixel, margin_threshold, pixel_robust};
use artqr::decoder::psi;
use artqr::qr::{build_matrix, encode_message, read_matrix, EcLevel, Version};
use artqr::raster::luma;
use artqr::rs::{rs_decode, rs_encode};
use artqr::sidecar::{SidecarMeta, StageParams};
use proptest::prelude::*;

fn level() -> impl Strategy<Value = EcLevel> {
    prop_oneof![Just(EcLevel::L), Just(EcLevel::M), Just(EcLevel::Q), Just(EcLevel::H)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rs_corrects_up_to_half_the_parity(
        data in prop::collection::vec(any::<u8>(), 1..120),
        ec in 2usize..31,
        errors in prop::collection::vec((any::<prop::sample::Index>(), 1u8..=255), 0..16),
    ) {
        prop_assume!(data.len() + ec <= 255);
        let mut block = data.clone();
        block.extend(rs_encode(&data, ec));
        let mut hit = std::collections::BTreeSet::new();
        for (idx, e) in errors.iter().take(ec / 2) {
            let p = idx.index(block.len());
            if hit.insert(p) {
                block[p] ^= e;
            }
        }
        let (out, n) = rs_decode(&block, ec).unwrap();
        prop_assert_eq!(out, data);
        prop_assert_eq!(n, hit.len());
    }

    #[test]
    fn read_inverts_build(
        payload in prop::collection::vec(any::<u8>(), 0..40),
        v in 1u8..=10,
        lvl in level(),
        mask in 0u8..8,
    ) {
        let version = Version::new(v).unwrap();
        let Ok(frame) = encode_message(&payload, version, lvl) else {
            return Ok(());
        };
        let matrix = build_matrix(&frame, mask);
        let back = read_matrix(&matrix).unwrap();
        prop_assert_eq!(back.interleaved(), frame.interleaved());
        prop_assert_eq!(back.payload().unwrap(), payload);
    }

    #[test]
    fn colorized_gray_stays_within_one_level(target in 0.0f64..=255.0, src in any::<[u8; 3]>()) {
        let out = colorize_pixel(target, src);
        prop_assert!((luma(out.0) - target).abs() <= 1.0);
    }

    #[test]
    fn robustness_shrinks_with_margin(
        gray in 0.0f64..=255.0,
        t in 0.0f64..=255.0,
        ideal in 0u8..2,
        d0 in 0.0f64..=1.0,
        d1 in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if d0 <= d1 { (d0, d1) } else { (d1, d0) };
        prop_assert!(pixel_robust(gray, t, ideal, hi) <= pixel_robust(gray, t, ideal, lo));
        if pixel_robust(gray, t, ideal, lo) == 1 {
            prop_assert_eq!(psi(gray, t), ideal);
        }
        let m = margin_threshold(t, ideal, hi);
        prop_assert!((0.0..=255.0).contains(&m));
    }

    #[test]
    fn sidecar_round_trips(
        payload in prop::collection::vec(any::<u8>(), 0..60),
        mask in 0u8..8,
        half in 1u32..10,
        qz in 0u32..6,
        delta in 0.0f64..=1.0,
    ) {
        let frame = encode_message(&payload, Version::new(5).unwrap(), EcLevel::L).unwrap();
        let matrix = build_matrix(&frame, mask);
        let a = 2 * half + 1;
        let params = StageParams { delta, eta: 0.8, spot_radius: half };
        let meta = SidecarMeta::new(&matrix, a, qz, &payload, params);
        let back = SidecarMeta::from_toml(&meta.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&back, &meta);
        prop_assert_eq!(back.scheduled_matrix().unwrap(), matrix);
    }
}
