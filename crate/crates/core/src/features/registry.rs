//! Named descriptor groups.
//!
//! Each group turns a [`PreparedImage`] into a fixed, named block of values.
//! A modality's feature vector is the concatenation of the groups listed by
//! [`FeatureConfig::layout`], looked up in a [`DescriptorRegistry`].

use std::collections::BTreeMap;
use std::sync::Arc;

use super::colour::{colour_statistics, HueVarianceMode};
use super::glcm::{
    compute_glcm, glcm_contrast, glcm_correlation, glcm_energy, glcm_homogeneity, Angle,
};
use super::lbp::{compute_lbp_riu2, lbp_statistics};
use super::stats::{grayscale_substitutes, intensity_statistics};
use super::{FeatureConfig, FeatureError, PreparedImage};

pub trait Descriptor: Send + Sync {
    /// Registry key.
    fn name(&self) -> &'static str;

    /// Column names, in output order.
    fn columns(&self) -> &'static [&'static str];

    /// Computes one value per column. Non-fatal conventions (e.g. a
    /// degenerate correlation replaced by 0) are appended to `flags`.
    fn compute(
        &self,
        img: &PreparedImage,
        cfg: &FeatureConfig,
        flags: &mut Vec<String>,
    ) -> Result<Vec<f64>, FeatureError>;
}

pub struct GlcmDescriptor;

impl Descriptor for GlcmDescriptor {
    fn name(&self) -> &'static str {
        "glcm"
    }

    fn columns(&self) -> &'static [&'static str] {
        &[
            "glcm_contrast",
            "glcm_homogeneity",
            "glcm_energy",
            "glcm_correlation",
        ]
    }

    fn compute(
        &self,
        img: &PreparedImage,
        cfg: &FeatureConfig,
        flags: &mut Vec<String>,
    ) -> Result<Vec<f64>, FeatureError> {
        let angles = cfg
            .glcm_angles
            .iter()
            .map(|&a| Angle::from_degrees(a).ok_or(FeatureError::InvalidOffsets))
            .collect::<Result<Vec<_>, _>>()?;
        let g = compute_glcm(&img.quantised, img.levels, &cfg.glcm_distances, &angles)?;
        let correlation = glcm_correlation(&g).unwrap_or_else(|| {
            flags.push("glcm_correlation: degenerate marginal, set to 0".into());
            0.0
        });
        Ok(vec![
            glcm_contrast(&g),
            glcm_homogeneity(&g),
            glcm_energy(&g),
            correlation,
        ])
    }
}

pub struct LbpDescriptor;

impl Descriptor for LbpDescriptor {
    fn name(&self) -> &'static str {
        "lbp"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["lbp_mean", "lbp_variance", "lbp_uniformity"]
    }

    fn compute(
        &self,
        img: &PreparedImage,
        _cfg: &FeatureConfig,
        _flags: &mut Vec<String>,
    ) -> Result<Vec<f64>, FeatureError> {
        let (mean, var, uni) = lbp_statistics(&compute_lbp_riu2(&img.equalised)?)?;
        Ok(vec![mean, var, uni])
    }
}

pub struct IntensityDescriptor;

impl Descriptor for IntensityDescriptor {
    fn name(&self) -> &'static str {
        "intensity"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["entropy", "intensity_energy", "intensity_mean", "intensity_std"]
    }

    fn compute(
        &self,
        img: &PreparedImage,
        _cfg: &FeatureConfig,
        _flags: &mut Vec<String>,
    ) -> Result<Vec<f64>, FeatureError> {
        let s = intensity_statistics(&img.equalised, img.levels)?;
        Ok(vec![s.entropy, s.energy, s.mean, s.std])
    }
}

pub struct ColourDescriptor {
    pub mode: HueVarianceMode,
}

impl Descriptor for ColourDescriptor {
    fn name(&self) -> &'static str {
        match self.mode {
            HueVarianceMode::Circular => "colour_circular",
            HueVarianceMode::Linear => "colour_linear",
        }
    }

    fn columns(&self) -> &'static [&'static str] {
        match self.mode {
            HueVarianceMode::Circular => &["hue_variance", "saturation_mean", "value_mean"],
            HueVarianceMode::Linear => &["hue_variance_linear", "saturation_mean", "value_mean"],
        }
    }

    fn compute(
        &self,
        img: &PreparedImage,
        _cfg: &FeatureConfig,
        _flags: &mut Vec<String>,
    ) -> Result<Vec<f64>, FeatureError> {
        let colour = img.colour.as_ref().ok_or(FeatureError::NotColour)?;
        let c = colour_statistics(colour, self.mode)?;
        Ok(vec![c.hue_variance, c.saturation_mean, c.value_mean])
    }
}

pub struct GrayscaleSubstituteDescriptor;

impl Descriptor for GrayscaleSubstituteDescriptor {
    fn name(&self) -> &'static str {
        "grayscale_substitutes"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["skewness", "kurtosis", "median"]
    }

    fn compute(
        &self,
        img: &PreparedImage,
        _cfg: &FeatureConfig,
        _flags: &mut Vec<String>,
    ) -> Result<Vec<f64>, FeatureError> {
        let g = grayscale_substitutes(&img.equalised)?;
        Ok(vec![g.skewness, g.kurtosis, g.median])
    }
}

/// Descriptor groups keyed by name.
#[derive(Clone)]
pub struct DescriptorRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Descriptor>>,
}

impl DescriptorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Adds or replaces a descriptor under its own name.
    pub fn register(&mut self, d: Arc<dyn Descriptor>) -> Option<Arc<dyn Descriptor>> {
        self.entries.insert(d.name(), d)
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn Descriptor>> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// Resolves a layout, failing on the first unknown name.
    pub fn resolve(&self, layout: &[&str]) -> Result<Vec<Arc<dyn Descriptor>>, FeatureError> {
        layout
            .iter()
            .map(|n| {
                self.get(n)
                    .cloned()
                    .ok_or_else(|| FeatureError::UnknownDescriptor(n.to_string()))
            })
            .collect()
    }
}

impl Default for DescriptorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(GlcmDescriptor));
        r.register(Arc::new(LbpDescriptor));
        r.register(Arc::new(IntensityDescriptor));
        r.register(Arc::new(ColourDescriptor {
            mode: HueVarianceMode::Circular,
        }));
        r.register(Arc::new(ColourDescriptor {
            mode: HueVarianceMode::Linear,
        }));
        r.register(Arc::new(GrayscaleSubstituteDescriptor));
        r
    }
}

impl std::fmt::Debug for DescriptorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}
