use super::{ImagingError, PreprocessConfig, RasterImage};

/// Mirror index into `[0, len)` without repeating the edge sample.
#[inline]
pub(crate) fn reflect101(i: usize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len - 1);
    let r = i % period;
    if r < len {
        r
    } else {
        period - r
    }
}

/// Geometry shared by the tile histograms and the interpolation step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TileGrid {
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub tile_w: usize,
    pub tile_h: usize,
}

impl TileGrid {
    pub fn new(width: usize, height: usize, grid: usize) -> Self {
        let tiles_x = grid.min(width).max(1);
        let tiles_y = grid.min(height).max(1);
        Self {
            tiles_x,
            tiles_y,
            tile_w: width.div_ceil(tiles_x),
            tile_h: height.div_ceil(tiles_y),
        }
    }

    pub fn tile_pixels(&self) -> usize {
        self.tile_w * self.tile_h
    }
}

/// Absolute per-bin clip count.
pub(crate) fn clip_count(clip_limit: f64, tile_pixels: usize, bins: usize) -> u64 {
    ((clip_limit * tile_pixels as f64 / bins as f64) as u64).max(1)
}

/// Clips a histogram and spreads the excess over all bins.
pub(crate) fn clip_histogram(hist: &mut [u64], clip: u64) {
    let bins = hist.len();
    let mut excess = 0u64;
    for h in hist.iter_mut() {
        if *h > clip {
            excess += *h - clip;
            *h = clip;
        }
    }
    let batch = excess / bins as u64;
    let residual = (excess % bins as u64) as usize;
    for h in hist.iter_mut() {
        *h += batch;
    }
    if residual > 0 {
        let step = (bins / residual).max(1);
        for i in (0..bins).step_by(step).take(residual) {
            hist[i] += 1;
        }
    }
}

/// Cumulative-histogram lookup table scaled to `[0, depth_max]`.
pub(crate) fn equalisation_lut(hist: &[u64], tile_pixels: usize, depth_max: u16) -> Vec<u16> {
    let n = tile_pixels as u64;
    let max = depth_max as u64;
    let mut cdf = 0u64;
    hist.iter()
        .map(|&h| {
            cdf += h;
            ((cdf * max + n / 2) / n).min(max) as u16
        })
        .collect()
}

/// Contrast-limited adaptive histogram equalisation.
///
/// The image is divided into `clahe_tile_grid` tiles per axis (fewer when
/// the image is narrower than the grid). Tiles that run past the border are
/// filled by mirroring, so every tile has the same pixel count. Each tile's
/// histogram is clipped at `clip_limit × tile_pixels / bins`, the excess is
/// redistributed uniformly, and pixels are mapped by bilinear interpolation
/// between the four nearest tile lookup tables.
pub fn apply_clahe(img: &RasterImage, cfg: &PreprocessConfig) -> Result<RasterImage, ImagingError> {
    if !img.channels().is_gray() {
        return Err(ImagingError::NotGrayscale);
    }
    if !(cfg.clahe_clip_limit > 0.0) || cfg.clahe_tile_grid == 0 {
        return Err(ImagingError::Config(
            "CLAHE needs clip_limit > 0 and tile_grid >= 1".into(),
        ));
    }
    let (w, h) = (img.width(), img.height());
    let depth_max = img.depth_max();
    let bins = depth_max as usize + 1;
    let grid = TileGrid::new(w, h, cfg.clahe_tile_grid);
    let n = grid.tile_pixels();
    let clip = clip_count(cfg.clahe_clip_limit, n, bins);
    let px = img.pixels();

    let mut luts = Vec::with_capacity(grid.tiles_x * grid.tiles_y);
    let mut hist = vec![0u64; bins];
    for ty in 0..grid.tiles_y {
        for tx in 0..grid.tiles_x {
            hist.iter_mut().for_each(|b| *b = 0);
            for yy in ty * grid.tile_h..(ty + 1) * grid.tile_h {
                let row = reflect101(yy, h) * w;
                for xx in tx * grid.tile_w..(tx + 1) * grid.tile_w {
                    hist[px[row + reflect101(xx, w)] as usize] += 1;
                }
            }
            clip_histogram(&mut hist, clip);
            luts.push(equalisation_lut(&hist, n, depth_max));
        }
    }

    // per-column neighbour tiles and weights
    let axis = |len: usize, tile: usize, tiles: usize| -> Vec<(usize, usize, f64)> {
        (0..len)
            .map(|i| {
                let pos = (i as f64 + 0.5) / tile as f64 - 0.5;
                let lo = pos.floor();
                let frac = pos - lo;
                let t1 = (lo as i64).clamp(0, tiles as i64 - 1) as usize;
                let t2 = (lo as i64 + 1).clamp(0, tiles as i64 - 1) as usize;
                (t1, t2, frac)
            })
            .collect()
    };
    let cols = axis(w, grid.tile_w, grid.tiles_x);
    let rows = axis(h, grid.tile_h, grid.tiles_y);

    let max = depth_max as f64;
    let mut out = vec![0u16; w * h];
    for (y, &(ty1, ty2, fy)) in rows.iter().enumerate() {
        for (x, &(tx1, tx2, fx)) in cols.iter().enumerate() {
            let v = px[y * w + x] as usize;
            let a = luts[ty1 * grid.tiles_x + tx1][v] as f64;
            let b = luts[ty1 * grid.tiles_x + tx2][v] as f64;
            let c = luts[ty2 * grid.tiles_x + tx1][v] as f64;
            let d = luts[ty2 * grid.tiles_x + tx2][v] as f64;
            let top = (1.0 - fx) * a + fx * b;
            let bottom = (1.0 - fx) * c + fx * d;
            let val = (1.0 - fy) * top + fy * bottom;
            out[y * w + x] = val.round().clamp(0.0, max) as u16;
        }
    }
    RasterImage::new(w, h, img.channels(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Channels;

    fn cfg(clip: f64, grid: usize) -> PreprocessConfig {
        PreprocessConfig {
            clahe_clip_limit: clip,
            clahe_tile_grid: grid,
            ..Default::default()
        }
    }

    #[test]
    fn reflect_indices() {
        let v: Vec<_> = (0..9).map(|i| reflect101(i, 4)).collect();
        assert_eq!(v, vec![0, 1, 2, 3, 2, 1, 0, 1, 2]);
        assert_eq!(reflect101(5, 1), 0);
    }

    #[test]
    fn clip_preserves_mass() {
        let mut h = vec![0u64; 8];
        h[3] = 100;
        h[5] = 7;
        clip_histogram(&mut h, 10);
        assert_eq!(h.iter().sum::<u64>(), 107);
        assert!(h.iter().all(|&b| b <= 10 + 97 / 8 + 1));
    }

    #[test]
    fn constant_image_stays_constant() {
        for (w, h) in [(64, 64), (100, 37), (5, 3)] {
            let img = RasterImage::filled(w, h, Channels::Gray8, 90);
            let out = apply_clahe(&img, &cfg(2.0, 8)).unwrap();
            let first = out.pixels()[0];
            assert!(out.pixels().iter().all(|&p| p == first), "{w}x{h}");
        }
    }

    #[test]
    fn two_regions_keep_order() {
        let (w, h) = (32, 16);
        let pixels: Vec<u16> = (0..h)
            .flat_map(|_| (0..w).map(move |x| if x < w / 2 { 0 } else { 255 }))
            .collect();
        let img = RasterImage::new(w, h, Channels::Gray8, pixels).unwrap();
        let out = apply_clahe(&img, &cfg(2.0, 1)).unwrap();
        let left_max = (0..h)
            .flat_map(|y| (0..w / 2).map(move |x| (x, y)))
            .map(|(x, y)| out.get(x, y, 0))
            .max()
            .unwrap();
        let right_min = (0..h)
            .flat_map(|y| (w / 2..w).map(move |x| (x, y)))
            .map(|(x, y)| out.get(x, y, 0))
            .min()
            .unwrap();
        assert!(left_max < right_min);
    }

    #[test]
    fn rejects_colour() {
        let img = RasterImage::filled(8, 8, Channels::Rgb8, 1);
        assert!(matches!(
            apply_clahe(&img, &cfg(2.0, 2)),
            Err(ImagingError::NotGrayscale)
        ));
    }

    #[test]
    fn sixteen_bit_output_in_range() {
        let pixels: Vec<u16> = (0..32 * 32).map(|i| ((i * 2654435761u64 as usize) % 65536) as u16).collect();
        let img = RasterImage::new(32, 32, Channels::Gray16, pixels).unwrap();
        let out = apply_clahe(&img, &cfg(2.0, 4)).unwrap();
        assert_eq!(out.channels(), Channels::Gray16);
        assert!(out.pixels().iter().any(|&p| p > 255));
    }
}
