//! Deterministic synthetic corpus of paired visual/X-ray textures.
//!
//! Authentic paintings share one multi-octave value-noise family: the visual
//! image maps a base field through a colour palette, and the X-ray mixes the
//! same base field with an independent "underlayer" field, so the two
//! modalities share structure but differ in detail. Each painting also
//! draws one heavy-tailed style factor that moves spectral slope, grain and
//! tone together in both modalities. Forgeries come from the
//! same family with a perturbed spectral slope, and the perturbation lands
//! mostly on one modality: even-numbered forgeries get a rougher visual
//! layer with a shifted palette, odd-numbered ones a rougher, decorrelated
//! X-ray. Either modality alone therefore misses about half the forgeries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{Channels, RasterImage};
use crate::modelsel::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid corpus spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub n_authentic: usize,
    pub n_forgery: usize,
    /// Side length of the square images, in pixels.
    pub image_size: u32,
    pub seed: u64,
    /// Lattice cells across the image at the coarsest octave.
    pub base_frequency: f64,
    pub octaves: u32,
    /// Amplitude ratio between successive octaves (spectral slope).
    pub persistence: f64,
    /// Per-pixel noise added on top of the fractal field, in unit intensity.
    pub noise_amplitude: f64,
    /// Scale of the per-painting style variation (spectral slope, grain and
    /// tone) within a class; drawn from a clipped Laplace distribution.
    pub style_jitter: f64,
    /// Colour stops, dark to light, that the visual field is mapped through.
    pub palette: Vec<[u8; 3]>,
    /// Forgery perturbation magnitude; scales the slope, palette and noise
    /// changes.
    pub forgery_perturbation: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_authentic: 24,
            n_forgery: 24,
            image_size: 256,
            seed: crate::DEFAULT_SEED,
            base_frequency: 16.0,
            octaves: 4,
            persistence: 0.5,
            noise_amplitude: 0.04,
            style_jitter: 0.02,
            palette: vec![[58, 36, 22], [139, 90, 43], [196, 160, 96], [232, 216, 176]],
            forgery_perturbation: 0.35,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |m: &str| Err(SynthError::Spec(m.into()));
        if self.image_size < 32 {
            return fail("image_size must be at least 32");
        }
        if !(self.base_frequency >= 1.0 && self.base_frequency.is_finite()) {
            return fail("base_frequency must be at least 1");
        }
        if !(1..=8).contains(&self.octaves) {
            return fail("octaves must lie in 1..=8");
        }
        if !(self.persistence > 0.0 && self.persistence < 1.0) {
            return fail("persistence must lie in (0, 1)");
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude <= 1.0) {
            return fail("noise_amplitude must lie in [0, 1]");
        }
        if !(0.0..=0.2).contains(&self.style_jitter) {
            return fail("style_jitter must lie in [0, 0.2]");
        }
        if self.palette.len() < 2 {
            return fail("palette needs at least two colours");
        }
        if self.n_forgery > 0 && !(self.forgery_perturbation > 0.0 && self.forgery_perturbation <= 1.0) {
            return fail("forgery_perturbation must lie in (0, 1] when forgeries are requested");
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.n_authentic + self.n_forgery
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPainting {
    pub id: String,
    /// 8-bit RGB.
    pub visual: RasterImage,
    /// 16-bit grayscale.
    pub xray: RasterImage,
    pub label: Label,
}

/// Which modality a forgery's perturbation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    None,
    Visual,
    Xray,
}

/// Tone-curve exponent per unit of style variation in the X-ray.
const XRAY_TONE_GAIN: f64 = 4.0;

struct Recipe {
    persistence: f64,
    noise: f64,
    hue_shift: f64,
}

/// Multi-octave value noise in [0, 1], row-major.
fn fractal_field(
    rng: &mut ChaCha8Rng,
    size: usize,
    base_frequency: f64,
    octaves: u32,
    persistence: f64,
) -> Vec<f64> {
    let mut field = vec![0.0; size * size];
    let mut amp = 1.0;
    let mut total = 0.0;
    for o in 0..octaves {
        let cells = (base_frequency * f64::from(1u32 << o)).round().max(1.0) as usize;
        let side = cells + 1;
        let lattice: Vec<f64> = (0..side * side).map(|_| rng.random::<f64>()).collect();
        let scale = cells as f64 / size as f64;
        for y in 0..size {
            let fy = (y as f64 + 0.5) * scale;
            let (y0, ty) = (fy.floor() as usize, smoothstep(fy.fract()));
            let y0 = y0.min(cells - 1);
            for x in 0..size {
                let fx = (x as f64 + 0.5) * scale;
                let (x0, tx) = (fx.floor() as usize, smoothstep(fx.fract()));
                let x0 = x0.min(cells - 1);
                let l = |yy: usize, xx: usize| lattice[yy * side + xx];
                let top = l(y0, x0) + (l(y0, x0 + 1) - l(y0, x0)) * tx;
                let bottom = l(y0 + 1, x0) + (l(y0 + 1, x0 + 1) - l(y0 + 1, x0)) * tx;
                field[y * size + x] += amp * (top + (bottom - top) * ty);
            }
        }
        total += amp;
        amp *= persistence;
    }
    field.iter_mut().for_each(|v| *v /= total);
    field
}

/// Unit-scale Laplace draw, clipped to ±5.
fn laplace(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    (sign * -u.ln()).clamp(-5.0, 5.0)
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn add_pixel_noise(rng: &mut ChaCha8Rng, field: &mut [f64], amplitude: f64) {
    for v in field.iter_mut() {
        *v = (*v + amplitude * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0);
    }
}

/// Piecewise-linear palette lookup, then a hue rotation by `hue_shift`
/// degrees.
fn palette_colour(palette: &[[u8; 3]], t: f64, hue_shift: f64) -> [u16; 3] {
    let pos = t.clamp(0.0, 1.0) * (palette.len() - 1) as f64;
    let i = (pos.floor() as usize).min(palette.len() - 2);
    let f = pos - i as f64;
    let mut rgb = [0.0; 3];
    for c in 0..3 {
        let (a, b) = (f64::from(palette[i][c]), f64::from(palette[i + 1][c]));
        rgb[c] = (a + (b - a) * f) / 255.0;
    }
    if hue_shift != 0.0 {
        rgb = rotate_hue(rgb, hue_shift);
    }
    rgb.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u16)
}

/// Rodrigues rotation of an RGB triple about the grey axis.
fn rotate_hue(rgb: [f64; 3], degrees: f64) -> [f64; 3] {
    let (s, c) = degrees.to_radians().sin_cos();
    let k = (1.0 - c) / 3.0;
    let r3 = 3f64.sqrt().recip() * s;
    let m = [
        [c + k, k - r3, k + r3],
        [k + r3, c + k, k - r3],
        [k - r3, k + r3, c + k],
    ];
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(rgb).map(|(a, b)| a * b).sum();
    }
    out
}

fn painting(spec: &CorpusSpec, index: usize) -> SyntheticPainting {
    let size = spec.image_size as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let (id, label, target) = if index < spec.n_authentic {
        (format!("auth_{index:03}"), Label::Positive, Target::None)
    } else {
        let j = index - spec.n_authentic;
        let target = if j % 2 == 0 { Target::Visual } else { Target::Xray };
        (format!("forg_{j:03}"), Label::Negative, target)
    };
    // one latent "hand" per painting moves slope, grain and tone together,
    // in both modalities
    let hand = spec.style_jitter * laplace(&mut rng);
    let persistence = (spec.persistence + hand).clamp(0.05, 0.9);
    let noise = spec.noise_amplitude * (1.0 + 5.0 * hand);
    let tone = hand;
    let delta = spec.forgery_perturbation;
    let authentic = Recipe {
        persistence,
        noise,
        hue_shift: 0.0,
    };
    let perturbed = Recipe {
        persistence: (persistence + 0.6 * delta).min(0.95),
        noise: noise * (1.0 + 4.0 * delta),
        hue_shift: 90.0 * delta,
    };
    let (vis, xr) = match target {
        Target::None => (&authentic, &authentic),
        Target::Visual => (&perturbed, &authentic),
        Target::Xray => (&authentic, &perturbed),
    };

    let field = |rng: &mut ChaCha8Rng, p: f64| {
        fractal_field(rng, size, spec.base_frequency, spec.octaves, p)
    };
    let base = field(&mut rng, authentic.persistence);
    let visual_base = if target == Target::Visual {
        field(&mut rng, vis.persistence)
    } else {
        base.clone()
    };
    let under = field(&mut rng, xr.persistence);
    let xray_base = if target == Target::Xray {
        field(&mut rng, xr.persistence)
    } else {
        base
    };

    let mut v = visual_base;
    add_pixel_noise(&mut rng, &mut v, vis.noise);
    let mut x: Vec<f64> = xray_base
        .iter()
        .zip(&under)
        .map(|(b, u)| 0.65 * b + 0.35 * u)
        .collect();
    add_pixel_noise(&mut rng, &mut x, xr.noise);

    let visual_pixels: Vec<u16> = v
        .iter()
        .flat_map(|&t| palette_colour(&spec.palette, t + 0.5 * tone, vis.hue_shift))
        .collect();
    // ground density: the same hand bends the radiograph's tone curve
    let density = (XRAY_TONE_GAIN * hand).exp();
    let xray_pixels: Vec<u16> = x
        .iter()
        .map(|&t| (t.powf(density) * 65535.0).round() as u16)
        .collect();
    let side = size;
    SyntheticPainting {
        id,
        visual: RasterImage::new(side, side, Channels::Rgb8, visual_pixels)
            .expect("buffer sized to the spec"),
        xray: RasterImage::new(side, side, Channels::Gray16, xray_pixels)
            .expect("buffer sized to the spec"),
        label,
    }
}

/// Generates the corpus: authentic paintings first, then forgeries. Each
/// painting draws from its own ChaCha stream, so output is independent of
/// scheduling.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<SyntheticPainting>, SynthError> {
    spec.validate()?;
    Ok((0..spec.total())
        .into_par_iter()
        .map(|i| painting(spec, i))
        .collect())
}
