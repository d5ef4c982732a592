//! Rotation-invariant uniform local binary patterns, P = 8, R = 1.

use std::sync::OnceLock;

use super::FeatureError;
use crate::imaging::RasterImage;

/// riu2 bin count for P = 8: codes 0..=8 plus one non-uniform bin.
pub const LBP_BINS: usize = 10;
pub const NON_UNIFORM_BIN: usize = 9;

/// The 8-connected neighbours in circular (counter-clockwise) order.
pub const NEIGHBOURS: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbpHistogram {
    pub bins: [u64; LBP_BINS],
    pub total: u64,
}

/// riu2 label of an 8-bit circular pattern.
pub fn riu2_label(pattern: u8) -> usize {
    let transitions = (pattern ^ pattern.rotate_right(1)).count_ones();
    if transitions <= 2 {
        pattern.count_ones() as usize
    } else {
        NON_UNIFORM_BIN
    }
}

fn riu2_table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u8; 256];
        for (code, slot) in t.iter_mut().enumerate() {
            *slot = riu2_label(code as u8) as u8;
        }
        t
    })
}

/// Histogram of riu2 codes over interior pixels. A neighbour counts as set
/// when it is greater than or equal to the centre.
pub fn compute_lbp_riu2(img: &RasterImage) -> Result<LbpHistogram, FeatureError> {
    if !img.channels().is_gray() {
        return Err(FeatureError::NotGrayscale);
    }
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(FeatureError::TooSmall {
            width: w,
            height: h,
            needed: 3,
        });
    }
    let px = img.pixels();
    let table = riu2_table();
    let mut bins = [0u64; LBP_BINS];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let centre = px[y * w + x];
            let mut code = 0u8;
            for (p, &(dx, dy)) in NEIGHBOURS.iter().enumerate() {
                let nx = (x as isize + dx) as usize;
                let ny = (y as isize + dy) as usize;
                if px[ny * w + nx] >= centre {
                    code |= 1 << p;
                }
            }
            bins[table[code as usize] as usize] += 1;
        }
    }
    Ok(LbpHistogram {
        bins,
        total: ((w - 2) * (h - 2)) as u64,
    })
}

/// Mean, variance and uniformity (`Σ p²`) of the normalised riu2 histogram.
pub fn lbp_statistics(hist: &LbpHistogram) -> Result<(f64, f64, f64), FeatureError> {
    if hist.total == 0 {
        return Err(FeatureError::EmptyHistogram);
    }
    let total = hist.total as f64;
    let p: Vec<f64> = hist.bins.iter().map(|&b| b as f64 / total).collect();
    let mean: f64 = p.iter().enumerate().map(|(k, &pk)| k as f64 * pk).sum();
    let variance: f64 = p
        .iter()
        .enumerate()
        .map(|(k, &pk)| (k as f64 - mean).powi(2) * pk)
        .sum();
    let uniformity: f64 = p.iter().map(|pk| pk * pk).sum();
    Ok((mean, variance, uniformity))
}
