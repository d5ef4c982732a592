use artauth_core::imaging::{apply_clahe, resize_bicubic, Channels, PreprocessConfig, RasterImage};
use artauth_oracles::{imaging as oracle, SplitMix};

fn random_gray(rng: &mut SplitMix, w: usize, h: usize, channels: Channels) -> RasterImage {
    let max = channels.depth_max() as u64;
    let px = (0..w * h).map(|_| rng.below(max + 1) as u16).collect();
    RasterImage::new(w, h, channels, px).unwrap()
}

fn clahe_cfg(clip: f64, grid: usize) -> PreprocessConfig {
    PreprocessConfig {
        clahe_clip_limit: clip,
        clahe_tile_grid: grid,
        ..Default::default()
    }
}

#[test]
fn clahe_matches_reference_on_random_64x64() {
    let mut rng = SplitMix(64);
    let img = random_gray(&mut rng, 64, 64, Channels::Gray8);
    let got = apply_clahe(&img, &clahe_cfg(2.0, 8)).unwrap();
    let want = oracle::clahe(img.pixels(), 64, 64, 255, 2.0, 8);
    assert_eq!(got.pixels(), &want[..]);
}

#[test]
fn clahe_matches_reference_on_awkward_shapes() {
    let mut rng = SplitMix(7);
    for (w, h, grid, clip) in [
        (37, 23, 8, 2.0),
        (5, 3, 8, 1.0),
        (50, 50, 3, 4.0),
        (17, 40, 1, 0.5),
        (64, 9, 4, 3.5),
    ] {
        let img = random_gray(&mut rng, w, h, Channels::Gray8);
        let got = apply_clahe(&img, &clahe_cfg(clip, grid)).unwrap();
        let want = oracle::clahe(img.pixels(), w, h, 255, clip, grid);
        assert_eq!(got.pixels(), &want[..], "{w}x{h} grid {grid} clip {clip}");
    }
}

#[test]
fn clahe_matches_reference_at_sixteen_bits() {
    let mut rng = SplitMix(16);
    // low-entropy content so the 65536-bin histograms are not all ones
    let px: Vec<u16> = (0..40 * 40).map(|_| (rng.below(64) * 1000) as u16).collect();
    let img = RasterImage::new(40, 40, Channels::Gray16, px).unwrap();
    let got = apply_clahe(&img, &clahe_cfg(2.0, 4)).unwrap();
    let want = oracle::clahe(img.pixels(), 40, 40, u16::MAX, 2.0, 4);
    assert_eq!(got.pixels(), &want[..]);
}

#[test]
fn clahe_is_deterministic_and_keeps_shape() {
    let mut rng = SplitMix(3);
    let img = random_gray(&mut rng, 70, 45, Channels::Gray8);
    let a = apply_clahe(&img, &clahe_cfg(2.0, 8)).unwrap();
    let b = apply_clahe(&img, &clahe_cfg(2.0, 8)).unwrap();
    assert_eq!(a, b);
    assert_eq!((a.width(), a.height(), a.channels()), (70, 45, Channels::Gray8));
}

#[test]
fn bicubic_matches_direct_evaluation() {
    let mut rng = SplitMix(11);
    for (w, h, target) in [(20, 20, 32), (33, 17, 48), (64, 64, 40), (7, 50, 32)] {
        let img = random_gray(&mut rng, w, h, Channels::Gray8);
        let got = resize_bicubic(&img, target);
        let want = oracle::bicubic(img.pixels(), w, h, target, target);
        for (k, (&g, &r)) in got.pixels().iter().zip(&want).enumerate() {
            let r = r.clamp(0.0, 255.0);
            assert!(
                (g as f64 - r).abs() <= 0.5 + 1e-9,
                "{w}x{h}->{target} pixel {k}: {g} vs {r}"
            );
        }
    }
}

#[test]
fn bicubic_handles_colour_per_channel() {
    let mut rng = SplitMix(5);
    let (w, h) = (24, 18);
    let px: Vec<u16> = (0..w * h * 3).map(|_| rng.below(256) as u16).collect();
    let img = RasterImage::new(w, h, Channels::Rgb8, px.clone()).unwrap();
    let got = resize_bicubic(&img, 32);
    for c in 0..3 {
        let plane: Vec<u16> = px.iter().skip(c).step_by(3).copied().collect();
        let want = oracle::bicubic(&plane, w, h, 32, 32);
        for (k, r) in want.iter().enumerate() {
            let g = got.pixels()[k * 3 + c] as f64;
            assert!((g - r.clamp(0.0, 255.0)).abs() <= 0.5 + 1e-9);
        }
    }
}
