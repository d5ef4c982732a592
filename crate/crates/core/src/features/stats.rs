//! First-order intensity statistics.

use super::FeatureError;
use crate::imaging::{quantise, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityStats {
    pub entropy: f64,
    pub energy: f64,
    pub mean: f64,
    pub std: f64,
}

/// Entropy and energy of the `levels`-bin quantised histogram, plus the
/// population mean and standard deviation of depth-normalised intensities.
pub fn intensity_statistics(img: &RasterImage, levels: usize) -> Result<IntensityStats, FeatureError> {
    if !img.channels().is_gray() {
        return Err(FeatureError::NotGrayscale);
    }
    let q = quantise(img, levels)?;
    let mut hist = vec![0u64; levels];
    for &p in q.pixels() {
        hist[p as usize] += 1;
    }
    let n = q.pixels().len() as f64;
    let mut entropy = 0.0;
    let mut energy = 0.0;
    for &c in &hist {
        if c > 0 {
            let p = c as f64 / n;
            entropy -= p * p.log2();
            energy += p * p;
        }
    }

    let max = img.depth_max() as f64;
    let raw_mean = raw_mean(img.pixels());
    let var = img
        .pixels()
        .iter()
        .map(|&p| ((p as f64 - raw_mean) / max).powi(2))
        .sum::<f64>()
        / n;
    Ok(IntensityStats {
        entropy: entropy.max(0.0),
        energy,
        mean: raw_mean / max,
        std: var.sqrt(),
    })
}

/// Exact integer sum divided once, so constant images have zero deviation.
fn raw_mean(px: &[u16]) -> f64 {
    px.iter().map(|&p| u64::from(p)).sum::<u64>() as f64 / px.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayscaleSubstitutes {
    pub skewness: f64,
    /// Excess kurtosis (fourth standardised moment minus 3).
    pub kurtosis: f64,
    pub median: f64,
}

/// Variance at or below this is treated as zero.
const VARIANCE_EPS: f64 = 1e-30;

/// Higher-order shape statistics used in place of colour for radiographs.
pub fn grayscale_substitutes(img: &RasterImage) -> Result<GrayscaleSubstitutes, FeatureError> {
    if !img.channels().is_gray() {
        return Err(FeatureError::NotGrayscale);
    }
    let max = img.depth_max() as f64;
    let px = img.pixels();
    let n = px.len() as f64;
    let mean = raw_mean(px);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &p in px {
        let d = (p as f64 - mean) / max;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 <= VARIANCE_EPS {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };

    // counting-sort median; exact for any depth
    let mut hist = vec![0u64; max as usize + 1];
    for &p in px {
        hist[p as usize] += 1;
    }
    let len = px.len() as u64;
    let order_stat = |k: u64| -> u16 {
        let mut acc = 0u64;
        for (v, &c) in hist.iter().enumerate() {
            acc += c;
            if acc > k {
                return v as u16;
            }
        }
        unreachable!("k < len")
    };
    let median = if len % 2 == 1 {
        order_stat(len / 2) as f64 / max
    } else {
        (order_stat(len / 2 - 1) as f64 + order_stat(len / 2) as f64) / 2.0 / max
    };
    Ok(GrayscaleSubstitutes {
        skewness,
        kurtosis,
        median,
    })
}
