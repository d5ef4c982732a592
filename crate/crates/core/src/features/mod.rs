//! The 14-value per-image descriptor.
//!
//! Both modalities share preprocessing (bicubic resize, CLAHE, quantisation)
//! and the GLCM, LBP and intensity groups. The last three values are colour
//! statistics for visual images and shape statistics for radiographs.

pub mod colour;
pub mod glcm;
pub mod lbp;
pub mod registry;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{
    apply_clahe, quantise, resize_bicubic, stretch_to_depth, to_grayscale, Channels,
    ImagingError, PreprocessConfig, RasterImage,
};

pub use colour::HueVarianceMode;
pub use registry::{Descriptor, DescriptorRegistry};

/// Values per single-modality vector.
pub const FEATURES_PER_IMAGE: usize = 14;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("operation requires a single-channel image")]
    NotGrayscale,
    #[error("operation requires an RGB image")]
    NotColour,
    #[error("image {width}x{height} is too small, needs at least {needed} pixels along the offset")]
    TooSmall {
        width: usize,
        height: usize,
        needed: usize,
    },
    #[error("GLCM needs non-empty positive distances and angles in {{0, 45, 90, 135}}")]
    InvalidOffsets,
    #[error("pixel value {value} is outside the {levels}-level quantisation")]
    NotQuantised { value: u16, levels: usize },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("unknown descriptor '{0}'")]
    UnknownDescriptor(String),
    #[error("layout produced {0} values, expected 14")]
    WrongLength(usize),
    #[error("descriptor '{name}' produced a non-finite value")]
    NonFinite { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Visual,
    Xray,
}

impl Modality {
    pub fn prefix(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Xray => "xray",
        }
    }
}

/// Extraction settings for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub preprocess: PreprocessConfig,
    pub glcm_distances: Vec<usize>,
    /// Degrees; each must be 0, 45, 90 or 135.
    pub glcm_angles: Vec<u32>,
    pub hue_mode: HueVarianceMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessConfig::default(),
            glcm_distances: vec![1, 2],
            glcm_angles: vec![0, 45, 90, 135],
            hue_mode: HueVarianceMode::Circular,
        }
    }
}

impl FeatureConfig {
    /// Descriptor groups, in order, that make up a modality's vector.
    pub fn layout(&self, modality: Modality) -> [&'static str; 4] {
        let last = match modality {
            Modality::Visual => match self.hue_mode {
                HueVarianceMode::Circular => "colour_circular",
                HueVarianceMode::Linear => "colour_linear",
            },
            Modality::Xray => "grayscale_substitutes",
        };
        ["glcm", "lbp", "intensity", last]
    }

    /// Column names for a modality under this config.
    pub fn schema(&self, modality: Modality) -> Vec<String> {
        let registry = DescriptorRegistry::default();
        registry
            .resolve(&self.layout(modality))
            .expect("built-in layout")
            .iter()
            .flat_map(|d| d.columns().iter().map(|c| c.to_string()))
            .collect()
    }
}

/// Rasters that the descriptor groups consume.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    /// Grayscale after resize (and exposure stretch for X-ray) and CLAHE, at
    /// the source depth.
    pub equalised: RasterImage,
    /// `equalised` quantised to `levels` grey levels.
    pub quantised: RasterImage,
    pub levels: usize,
    /// Resized, unequalised RGB (visual only).
    pub colour: Option<RasterImage>,
}

/// Runs the shared preprocessing for one image.
pub fn prepare(
    img: &RasterImage,
    modality: Modality,
    cfg: &PreprocessConfig,
) -> Result<PreparedImage, FeatureError> {
    cfg.validate()?;
    let (gray, colour) = match modality {
        Modality::Visual => {
            let resized = resize_bicubic(img, cfg.target_size);
            let colour = match resized.channels() {
                Channels::Rgb8 => resized.clone(),
                Channels::Gray8 => gray_to_rgb(&resized),
                // 16-bit photographs are narrowed to 8 bits for HSV
                Channels::Gray16 => gray_to_rgb(&narrow_to_8bit(&resized)),
            };
            (to_grayscale(&resized), Some(colour))
        }
        Modality::Xray => {
            let resized = resize_bicubic(&to_grayscale(img), cfg.target_size);
            (stretch_to_depth(&resized)?, None)
        }
    };
    let equalised = apply_clahe(&gray, cfg)?;
    let quantised = quantise(&equalised, cfg.gray_levels)?;
    Ok(PreparedImage {
        equalised,
        quantised,
        levels: cfg.gray_levels,
        colour,
    })
}

fn gray_to_rgb(img: &RasterImage) -> RasterImage {
    let px = img.pixels().iter().flat_map(|&p| [p, p, p]).collect();
    RasterImage::new(img.width(), img.height(), Channels::Rgb8, px).expect("same dimensions")
}

fn narrow_to_8bit(img: &RasterImage) -> RasterImage {
    let px = img.pixels().iter().map(|&p| p >> 8).collect();
    RasterImage::new(img.width(), img.height(), Channels::Gray8, px).expect("same dimensions")
}

/// Ordered 14-value descriptor of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub modality: Modality,
    pub schema: Vec<String>,
    pub values: Vec<f64>,
    /// Conventions applied during extraction (e.g. degenerate correlation).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Full preprocessing and descriptor extraction with the built-in registry.
pub fn extract_features(
    img: &RasterImage,
    modality: Modality,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    extract_with(&DescriptorRegistry::default(), img, modality, cfg)
}

pub fn extract_with(
    registry: &DescriptorRegistry,
    img: &RasterImage,
    modality: Modality,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    let groups = registry.resolve(&cfg.layout(modality))?;
    let prepared = prepare(img, modality, &cfg.preprocess)?;
    let mut schema = Vec::with_capacity(FEATURES_PER_IMAGE);
    let mut values = Vec::with_capacity(FEATURES_PER_IMAGE);
    let mut flags = Vec::new();
    for d in &groups {
        let block = d.compute(&prepared, cfg, &mut flags)?;
        debug_assert_eq!(block.len(), d.columns().len());
        if block.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite {
                name: d.name().to_string(),
            });
        }
        schema.extend(d.columns().iter().map(|c| c.to_string()));
        values.extend(block);
    }
    if values.len() != FEATURES_PER_IMAGE {
        return Err(FeatureError::WrongLength(values.len()));
    }
    Ok(FeatureVector {
        modality,
        schema,
        values,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> FeatureConfig {
        FeatureConfig {
            preprocess: PreprocessConfig {
                target_size: 48,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn noisy_rgb(w: usize, h: usize) -> RasterImage {
        let px = (0..w * h * 3)
            .map(|i| ((i * 2654435761usize) >> 7) as u16 % 256)
            .collect();
        RasterImage::new(w, h, Channels::Rgb8, px).unwrap()
    }

    #[test]
    fn schemas() {
        let cfg = FeatureConfig::default();
        let v = cfg.schema(Modality::Visual);
        let x = cfg.schema(Modality::Xray);
        assert_eq!(v.len(), 14);
        assert_eq!(&v[11..], &["hue_variance", "saturation_mean", "value_mean"]);
        assert_eq!(&x[11..], &["skewness", "kurtosis", "median"]);
        assert_eq!(v[..11], x[..11]);
        assert_eq!(
            &v[..11],
            &[
                "glcm_contrast",
                "glcm_homogeneity",
                "glcm_energy",
                "glcm_correlation",
                "lbp_mean",
                "lbp_variance",
                "lbp_uniformity",
                "entropy",
                "intensity_energy",
                "intensity_mean",
                "intensity_std"
            ]
        );
        let strict = FeatureConfig {
            hue_mode: HueVarianceMode::Linear,
            ..Default::default()
        };
        assert_eq!(strict.schema(Modality::Visual)[11], "hue_variance_linear");
    }

    #[test]
    fn visual_extraction() {
        let img = noisy_rgb(40, 30);
        let fv = extract_features(&img, Modality::Visual, &small_cfg()).unwrap();
        assert_eq!(fv.values.len(), 14);
        assert!(fv.values.iter().all(|v| v.is_finite()));
        assert_eq!(fv.schema[11], "hue_variance");
        let again = extract_features(&img, Modality::Visual, &small_cfg()).unwrap();
        assert_eq!(
            fv.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            again.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn xray_extraction_sixteen_bit() {
        let px = (0..50 * 50).map(|i| ((i * 40503) % 65536) as u16).collect();
        let img = RasterImage::new(50, 50, Channels::Gray16, px).unwrap();
        let fv = extract_features(&img, Modality::Xray, &small_cfg()).unwrap();
        assert_eq!(fv.modality, Modality::Xray);
        assert_eq!(&fv.schema[11..], &["skewness", "kurtosis", "median"]);
        assert!(fv.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn constant_image_flags_correlation() {
        let img = RasterImage::filled(40, 40, Channels::Gray8, 100);
        let fv = extract_features(&img, Modality::Xray, &small_cfg()).unwrap();
        assert_eq!(fv.values[3], 0.0);
        assert_eq!(fv.flags.len(), 1);
    }

    #[test]
    fn grayscale_visual_has_zero_colour_dispersion() {
        let px = (0..40 * 40).map(|i| (i % 256) as u16).collect();
        let img = RasterImage::new(40, 40, Channels::Gray8, px).unwrap();
        let fv = extract_features(&img, Modality::Visual, &small_cfg()).unwrap();
        assert_eq!(fv.values[11], 0.0);
        assert_eq!(fv.values[12], 0.0);
    }

    #[test]
    fn unknown_descriptor_in_custom_registry() {
        let reg = DescriptorRegistry::empty();
        let img = noisy_rgb(40, 40);
        assert!(matches!(
            extract_with(&reg, &img, Modality::Visual, &small_cfg()),
            Err(FeatureError::UnknownDescriptor(_))
        ));
    }
}
