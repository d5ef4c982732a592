//! Flat `key = value` configuration shared by every subcommand.
//!
//! Unknown keys are rejected. Every key is optional; see the README for
//! the full list and defaults.

use std::path::Path;

use artauth_core::features::{FeatureConfig, HueVarianceMode};
use artauth_core::imaging::PreprocessConfig;
use artauth_core::modelsel::{GridConfig, ProtocolConfig};
use artauth_core::ocsvm::SolverConfig;
use artauth_core::synth::CorpusSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub target_size: usize,
    pub clahe_clip_limit: f64,
    pub clahe_tile_grid: usize,
    pub gray_levels: usize,
    pub glcm_distances: Vec<usize>,
    pub glcm_angles: Vec<u32>,
    pub hue_mode: HueVarianceMode,

    pub nus: Vec<f64>,
    pub gammas: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub solver_tolerance: f64,
    pub solver_max_iterations: usize,

    /// Fixed hyperparameters for `train`; grid search picks them when unset.
    pub nu: Option<f64>,
    pub gamma: Option<f64>,

    pub z_offset: f64,
    pub importance_components: Option<usize>,

    pub n_authentic: usize,
    pub n_forgery: usize,
    pub image_size: u32,
    pub base_frequency: f64,
    pub octaves: u32,
    pub persistence: f64,
    pub noise_amplitude: f64,
    pub style_jitter: f64,
    pub palette: Vec<[u8; 3]>,
    pub forgery_perturbation: f64,
}

impl Default for Config {
    fn default() -> Self {
        let features = FeatureConfig::default();
        let grid = GridConfig::default();
        let protocol = ProtocolConfig::default();
        let corpus = CorpusSpec::default();
        Self {
            target_size: features.preprocess.target_size,
            clahe_clip_limit: features.preprocess.clahe_clip_limit,
            clahe_tile_grid: features.preprocess.clahe_tile_grid,
            gray_levels: features.preprocess.gray_levels,
            glcm_distances: features.glcm_distances,
            glcm_angles: features.glcm_angles,
            hue_mode: features.hue_mode,
            nus: grid.nus,
            gammas: grid.gammas,
            folds: grid.folds,
            seed: grid.seed,
            test_fraction: protocol.test_fraction,
            solver_tolerance: grid.solver.tolerance,
            solver_max_iterations: grid.solver.max_iterations,
            nu: None,
            gamma: None,
            z_offset: 0.0,
            importance_components: None,
            n_authentic: corpus.n_authentic,
            n_forgery: corpus.n_forgery,
            image_size: corpus.image_size,
            base_frequency: corpus.base_frequency,
            octaves: corpus.octaves,
            persistence: corpus.persistence,
            noise_amplitude: corpus.noise_amplitude,
            style_jitter: corpus.style_jitter,
            palette: corpus.palette,
            forgery_perturbation: corpus.forgery_perturbation,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| CliError::input(format!("config: {}", e.message())))
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::input(format!("cannot read config {}: {e}", p.display())))?;
                Config::from_toml(&text).map_err(|e| e.context(p.display()))
            }
        }
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, strict_paper: bool) -> Config {
        if let Some(s) = seed {
            self.seed = s;
        }
        if strict_paper {
            self.hue_mode = HueVarianceMode::Linear;
        }
        self
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            preprocess: PreprocessConfig {
                target_size: self.target_size,
                clahe_clip_limit: self.clahe_clip_limit,
                clahe_tile_grid: self.clahe_tile_grid,
                gray_levels: self.gray_levels,
            },
            glcm_distances: self.glcm_distances.clone(),
            glcm_angles: self.glcm_angles.clone(),
            hue_mode: self.hue_mode,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.solver_tolerance,
            max_iterations: self.solver_max_iterations,
        }
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig {
            nus: self.nus.clone(),
            gammas: self.gammas.clone(),
            folds: self.folds,
            seed: self.seed,
            solver: self.solver(),
        }
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            grid: self.grid(),
            test_fraction: self.test_fraction,
        }
    }

    pub fn corpus(&self) -> CorpusSpec {
        CorpusSpec {
            n_authentic: self.n_authentic,
            n_forgery: self.n_forgery,
            image_size: self.image_size,
            seed: self.seed,
            base_frequency: self.base_frequency,
            octaves: self.octaves,
            persistence: self.persistence,
            noise_amplitude: self.noise_amplitude,
            style_jitter: self.style_jitter,
            palette: self.palette.clone(),
            forgery_perturbation: self.forgery_perturbation,
        }
    }

    /// Validates the preprocessing and solver keys every pipeline step uses.
    pub fn validate(&self) -> Result<(), CliError> {
        self.features().preprocess.validate()?;
        if let Some(a) = self.glcm_angles.iter().find(|a| ![0, 45, 90, 135].contains(*a)) {
            return Err(CliError::input(format!("config: glcm angle {a} not in 0/45/90/135")));
        }
        if self.glcm_distances.is_empty() || self.glcm_distances.contains(&0) {
            return Err(CliError::input("config: glcm_distances must be non-empty and positive"));
        }
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance.is_finite()) {
            return Err(CliError::input("config: solver_tolerance must be positive"));
        }
        if !self.z_offset.is_finite() {
            return Err(CliError::input("config: z_offset must be finite"));
        }
        if self.importance_components == Some(0) {
            return Err(CliError::input("config: importance_components must be >= 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }
}
