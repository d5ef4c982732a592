#![allow(dead_code)]

use artauth_core::features::{extract_features, FeatureConfig, Modality};
use artauth_core::fusion::fuse;
use artauth_core::imaging::PreprocessConfig;
use artauth_core::modelsel::Sample;
use artauth_core::synth::{generate_corpus, CorpusSpec};

/// Small, fast variant of the default corpus.
pub fn small_spec(seed: u64) -> CorpusSpec {
    CorpusSpec {
        image_size: 64,
        seed,
        ..Default::default()
    }
}

pub fn small_features() -> FeatureConfig {
    FeatureConfig {
        preprocess: PreprocessConfig {
            target_size: 64,
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Fused 28-value rows for every painting of `spec`.
pub fn corpus_samples(spec: &CorpusSpec, cfg: &FeatureConfig) -> Vec<Sample> {
    generate_corpus(spec)
        .unwrap()
        .into_iter()
        .map(|p| {
            let v = extract_features(&p.visual, Modality::Visual, cfg).unwrap();
            let x = extract_features(&p.xray, Modality::Xray, cfg).unwrap();
            Sample {
                values: fuse(&v, &x, &p.id).unwrap().values,
                id: p.id,
                label: p.label,
            }
        })
        .collect()
}
