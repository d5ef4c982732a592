//! Multimodal texture authentication.
//!
//! Visual photographs and X-ray radiographs of the same painting go through
//! one shared preprocessing and descriptor pipeline, yielding 14 values per
//! image. The two vectors are concatenated into a 28-value fused vector,
//! z-scored, and scored by a one-class SVM with an RBF kernel that is trained
//! on authentic works only.
//!
//! Module map:
//!
//! - [`imaging`]: decoding, bicubic resize, CLAHE, grayscale, quantisation
//! - [`features`]: GLCM, LBP, intensity and colour descriptors, and the
//!   named descriptor registry that assembles a [`features::FeatureVector`]
//! - [`fusion`]: visual/X-ray concatenation and the z-score [`fusion::Scaler`]
//! - [`ocsvm`]: RBF kernel, SMO dual solver, decision function
//! - [`model`]: scaler + SVM bundled into a scoring model
//! - [`modelsel`]: painting-grouped splits, k-fold, grid search, metrics
//! - [`analysis`]: PCA feature importance and score calibration
//! - [`synth`]: deterministic synthetic corpus of paired texture images

/// Seed used by the corpus generator and the evaluation protocol unless
/// overridden.
pub const DEFAULT_SEED: u64 = 10;

pub mod analysis;
pub mod features;
pub mod fusion;
pub mod imaging;
pub mod model;
pub mod modelsel;
pub mod ocsvm;
pub mod synth;

pub use features::{FeatureConfig, FeatureVector, Modality};
pub use fusion::{FusedVector, Scaler};
pub use imaging::{Channels, PreprocessConfig, RasterImage};
pub use model::{AuthModel, ModalityView};
pub use ocsvm::{Classification, KernelParams, OcSvm};
