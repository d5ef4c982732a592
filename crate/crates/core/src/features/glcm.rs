//! Grey-level co-occurrence matrix and its Haralick-style statistics.

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::imaging::RasterImage;

/// Supported GLCM orientations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Angle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Angle {
    pub const ALL: [Angle; 4] = [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135];

    pub fn from_degrees(deg: u32) -> Option<Angle> {
        match deg {
            0 => Some(Angle::Deg0),
            45 => Some(Angle::Deg45),
            90 => Some(Angle::Deg90),
            135 => Some(Angle::Deg135),
            _ => None,
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Angle::Deg0 => 0,
            Angle::Deg45 => 45,
            Angle::Deg90 => 90,
            Angle::Deg135 => 135,
        }
    }

    /// Pixel displacement `(dx, dy)` for distance `d`; rows grow downwards,
    /// so 45° points up and to the right.
    pub fn offset(self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            Angle::Deg0 => (d, 0),
            Angle::Deg45 => (d, -d),
            Angle::Deg90 => (0, -d),
            Angle::Deg135 => (-d, -d),
        }
    }
}

/// Symmetric, normalised co-occurrence matrix pooled over a set of offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMatrix {
    levels: usize,
    probs: Vec<f64>,
    offsets: Vec<(usize, Angle)>,
}

impl GlcmMatrix {
    /// Builds a matrix from raw probabilities (row-major `levels × levels`).
    pub fn from_probabilities(levels: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), levels * levels);
        Self {
            levels,
            probs,
            offsets: Vec::new(),
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn offsets(&self) -> &[(usize, Angle)] {
        &self.offsets
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.levels + j]
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let l = self.levels;
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &p)| (k / l, k % l, p))
    }
}

/// Accumulates symmetric pair counts for every (distance, angle) combination
/// into one matrix, then normalises it to unit mass.
///
/// `img` must already be quantised to `levels` grey levels.
pub fn compute_glcm(
    img: &RasterImage,
    levels: usize,
    distances: &[usize],
    angles: &[Angle],
) -> Result<GlcmMatrix, FeatureError> {
    if !img.channels().is_gray() {
        return Err(FeatureError::NotGrayscale);
    }
    if distances.is_empty() || angles.is_empty() || distances.contains(&0) {
        return Err(FeatureError::InvalidOffsets);
    }
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    if let Some(&p) = px.iter().find(|&&p| p as usize >= levels) {
        return Err(FeatureError::NotQuantised { value: p, levels });
    }

    let mut counts = vec![0u64; levels * levels];
    let mut offsets = Vec::new();
    for &d in distances {
        for &angle in angles {
            let (dx, dy) = angle.offset(d);
            let (adx, ady) = (dx.unsigned_abs(), dy.unsigned_abs());
            if adx >= w || ady >= h {
                return Err(FeatureError::TooSmall {
                    width: w,
                    height: h,
                    needed: d + 1,
                });
            }
            offsets.push((d, angle));
            // iterate over the valid reference-pixel window only
            let x0 = if dx < 0 { adx } else { 0 };
            let x1 = if dx > 0 { w - adx } else { w };
            let y0 = if dy < 0 { ady } else { 0 };
            let y1 = if dy > 0 { h - ady } else { h };
            for y in y0..y1 {
                let ny = (y as isize + dy) as usize;
                let row = &px[y * w..(y + 1) * w];
                let nrow = &px[ny * w..(ny + 1) * w];
                for x in x0..x1 {
                    let i = row[x] as usize;
                    let j = nrow[(x as isize + dx) as usize] as usize;
                    counts[i * levels + j] += 1;
                    counts[j * levels + i] += 1;
                }
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(FeatureError::TooSmall {
            width: w,
            height: h,
            needed: distances.iter().max().copied().unwrap_or(1) + 1,
        });
    }
    let total = total as f64;
    Ok(GlcmMatrix {
        levels,
        probs: counts.into_iter().map(|c| c as f64 / total).collect(),
        offsets,
    })
}

/// `Σ (i−j)² P(i,j)`
pub fn glcm_contrast(g: &GlcmMatrix) -> f64 {
    g.cells()
        .map(|(i, j, p)| {
            let d = i as f64 - j as f64;
            d * d * p
        })
        .sum()
}

/// `Σ P(i,j) / (1 + |i−j|)`
pub fn glcm_homogeneity(g: &GlcmMatrix) -> f64 {
    g.cells()
        .map(|(i, j, p)| p / (1.0 + i.abs_diff(j) as f64))
        .sum()
}

/// `Σ P(i,j)²`
pub fn glcm_energy(g: &GlcmMatrix) -> f64 {
    g.cells().map(|(_, _, p)| p * p).sum()
}

/// Marginal standard deviations below this are treated as zero.
pub const CORRELATION_EPS: f64 = 1e-12;

/// Pearson correlation of the row and column indices under `P`.
///
/// Returns `None` when either marginal is degenerate (constant image); the
/// feature pipeline records that case and substitutes 0.
pub fn glcm_correlation(g: &GlcmMatrix) -> Option<f64> {
    let l = g.levels();
    let mut row = vec![0.0; l];
    let mut col = vec![0.0; l];
    for (i, j, p) in g.cells() {
        row[i] += p;
        col[j] += p;
    }
    let moments = |m: &[f64]| {
        let mu: f64 = m.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
        let var: f64 = m
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64 - mu).powi(2) * p)
            .sum();
        (mu, var.sqrt())
    };
    let (mu_i, sd_i) = moments(&row);
    let (mu_j, sd_j) = moments(&col);
    if sd_i < CORRELATION_EPS || sd_j < CORRELATION_EPS {
        return None;
    }
    let cov: f64 = g
        .cells()
        .map(|(i, j, p)| (i as f64 - mu_i) * (j as f64 - mu_j) * p)
        .sum();
    Some((cov / (sd_i * sd_j)).clamp(-1.0, 1.0))
}
