//! HSV colour statistics for visual images.

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::imaging::{Channels, RasterImage};

/// How hue dispersion is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HueVarianceMode {
    /// `1 − R̄`, where R̄ is the mean resultant length of hue unit vectors.
    #[default]
    Circular,
    /// Plain variance of hue degrees, divided by the maximum 180².
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColourStats {
    pub hue_variance: f64,
    pub saturation_mean: f64,
    pub value_mean: f64,
}

/// RGB (8-bit) to HSV with H in degrees `[0, 360)` and S, V in `[0, 1]`.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == 0 {
        return (0.0, 0.0, 0.0);
    }
    let delta = (max - min) as f64;
    let s = delta / max as f64;
    if max == min {
        return (0.0, s, v);
    }
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let h = if max as f64 == r {
        60.0 * ((g - b) / delta)
    } else if max as f64 == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    (if h >= 360.0 { h - 360.0 } else { h }, s, v)
}

/// Hue dispersion and mean saturation/value over the image.
///
/// Achromatic pixels (S = 0) carry no hue and are left out of the hue term;
/// an entirely achromatic image has zero hue variance.
pub fn colour_statistics(img: &RasterImage, mode: HueVarianceMode) -> Result<ColourStats, FeatureError> {
    if img.channels() != Channels::Rgb8 {
        return Err(FeatureError::NotColour);
    }
    let n = (img.width() * img.height()) as f64;
    let (mut s_sum, mut v_sum) = (0.0, 0.0);
    let mut hues = Vec::new();
    for rgb in img.pixels().chunks_exact(3) {
        let (h, s, v) = rgb_to_hsv(rgb[0] as u8, rgb[1] as u8, rgb[2] as u8);
        s_sum += s;
        v_sum += v;
        if s > 0.0 {
            hues.push(h);
        }
    }
    let hue_variance = if hues.is_empty() {
        0.0
    } else {
        match mode {
            HueVarianceMode::Circular => circular_hue_variance(&hues),
            HueVarianceMode::Linear => linear_hue_variance(&hues),
        }
    };
    Ok(ColourStats {
        hue_variance,
        saturation_mean: s_sum / n,
        value_mean: v_sum / n,
    })
}

fn circular_hue_variance(hues: &[f64]) -> f64 {
    let n = hues.len() as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for h in hues {
        let (sin, cos) = h.to_radians().sin_cos();
        c += cos;
        s += sin;
    }
    let r = (c / n).hypot(s / n);
    // rounding can leave a single-hue image a few ulps away from R = 1
    let var = 1.0 - r;
    if var < 1e-12 {
        0.0
    } else {
        var.min(1.0)
    }
}

fn linear_hue_variance(hues: &[f64]) -> f64 {
    let n = hues.len() as f64;
    let mean = hues.iter().sum::<f64>() / n;
    let var = hues.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n;
    (var / (180.0 * 180.0)).min(1.0)
}
