use super::RasterImage;

/// Keys cubic convolution kernel with a = -0.5.
#[inline]
fn cubic(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Four source indices and weights for one output coordinate.
fn taps(dst: usize, src_len: usize, dst_len: usize) -> ([usize; 4], [f64; 4]) {
    let scale = src_len as f64 / dst_len as f64;
    let centre = (dst as f64 + 0.5) * scale - 0.5;
    let base = centre.floor();
    let frac = centre - base;
    let mut idx = [0usize; 4];
    let mut w = [0f64; 4];
    for k in 0..4 {
        let offset = k as f64 - 1.0;
        let i = (base as i64 + k as i64 - 1).clamp(0, src_len as i64 - 1);
        idx[k] = i as usize;
        w[k] = cubic(frac - offset);
    }
    (idx, w)
}

/// Separable bicubic resize to `target_size` × `target_size`.
///
/// Sampling uses pixel-centre alignment and edge replication. Output samples
/// are rounded and clamped to the input depth range.
pub fn resize_bicubic(img: &RasterImage, target_size: usize) -> RasterImage {
    let (sw, sh) = (img.width(), img.height());
    if sw == target_size && sh == target_size {
        return img.clone();
    }
    let (dw, dh) = (target_size, target_size);
    let cc = img.channels().count();
    let max = img.depth_max() as f64;

    let xtaps: Vec<_> = (0..dw).map(|x| taps(x, sw, dw)).collect();
    let ytaps: Vec<_> = (0..dh).map(|y| taps(y, sh, dh)).collect();

    // horizontal pass: sh rows × dw columns
    let mut horiz = vec![0f64; sh * dw * cc];
    for y in 0..sh {
        for (x, (idx, w)) in xtaps.iter().enumerate() {
            for c in 0..cc {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += w[k] * img.get(idx[k], y, c) as f64;
                }
                horiz[(y * dw + x) * cc + c] = acc;
            }
        }
    }

    let mut out = vec![0u16; dw * dh * cc];
    for (y, (idx, w)) in ytaps.iter().enumerate() {
        for x in 0..dw {
            for c in 0..cc {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += w[k] * horiz[(idx[k] * dw + x) * cc + c];
                }
                out[(y * dw + x) * cc + c] = acc.round().clamp(0.0, max) as u16;
            }
        }
    }
    RasterImage::new(dw, dh, img.channels(), out).expect("resized buffer is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Channels;

    #[test]
    fn kernel_partition_of_unity() {
        for i in 0..=20 {
            let f = i as f64 / 20.0;
            let s: f64 = (0..4).map(|k| cubic(f - (k as f64 - 1.0))).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(cubic(0.0), 1.0);
        assert_eq!(cubic(1.0), 0.0);
        assert_eq!(cubic(2.0), 0.0);
    }

    #[test]
    fn constant_stays_constant() {
        let img = RasterImage::filled(100, 100, Channels::Gray8, 137);
        let r = resize_bicubic(&img, 512);
        assert_eq!((r.width(), r.height()), (512, 512));
        assert!(r.pixels().iter().all(|&p| p == 137));

        let img = RasterImage::filled(40, 70, Channels::Rgb8, 250);
        let r = resize_bicubic(&img, 64);
        assert!(r.pixels().iter().all(|&p| p == 250));
    }

    #[test]
    fn same_size_is_identity() {
        let pixels: Vec<u16> = (0..64 * 64).map(|i| ((i * 7919) % 256) as u16).collect();
        let img = RasterImage::new(64, 64, Channels::Gray8, pixels).unwrap();
        assert_eq!(resize_bicubic(&img, 64), img);
    }

    #[test]
    fn ramp_halved_matches_analytic() {
        // value = 2x across a 128-wide ramp; cubic convolution reproduces linear
        // functions exactly away from the replicated border.
        let (w, h) = (128usize, 128usize);
        let pixels: Vec<u16> = (0..h).flat_map(|_| (0..w).map(|x| (2 * x) as u16)).collect();
        let img = RasterImage::new(w, h, Channels::Gray8, pixels).unwrap();
        let r = resize_bicubic(&img, 64);
        for y in 0..64 {
            for x in 2..62 {
                let src = (x as f64 + 0.5) * 2.0 - 0.5;
                let analytic = 2.0 * src;
                let got = r.get(x, y, 0) as f64;
                assert!((got - analytic).abs() <= 1.0, "x={x} got {got} want {analytic}");
            }
        }
    }

    #[test]
    fn overshoot_is_clamped() {
        let mut pixels = vec![0u16; 16];
        pixels[5] = 255;
        pixels[6] = 255;
        let img = RasterImage::new(4, 4, Channels::Gray8, pixels).unwrap();
        let r = resize_bicubic(&img, 37);
        assert!(r.pixels().iter().all(|&p| p <= 255));
    }
}
