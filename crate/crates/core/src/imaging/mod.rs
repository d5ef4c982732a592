//! Image loading and preprocessing.
//!
//! All rasters are stored as row-major `u16` samples regardless of depth, so
//! 16-bit radiographs keep their full dynamic range until quantisation.

mod clahe;
mod resize;

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clahe::apply_clahe;
pub use resize::resize_bicubic;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("failed to read image {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("unsupported pixel format {0}")]
    UnsupportedFormat(String),
    #[error("image has zero width or height")]
    ZeroDimension,
    #[error("pixel buffer length {actual} does not match {width}x{height}x{channels}")]
    BufferSize {
        width: usize,
        height: usize,
        channels: usize,
        actual: usize,
    },
    #[error("operation requires a single-channel image")]
    NotGrayscale,
    #[error("gray levels must lie in [2, 256], got {0}")]
    Levels(usize),
    #[error("invalid preprocessing config: {0}")]
    Config(String),
    #[error("failed to write image {path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: image::ImageError,
    },
}

/// Sample layout of a [`RasterImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channels {
    Gray8,
    Gray16,
    Rgb8,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray8 | Channels::Gray16 => 1,
            Channels::Rgb8 => 3,
        }
    }

    /// Largest representable sample value.
    pub fn depth_max(self) -> u16 {
        match self {
            Channels::Gray8 | Channels::Rgb8 => u8::MAX as u16,
            Channels::Gray16 => u16::MAX,
        }
    }

    pub fn is_gray(self) -> bool {
        self.count() == 1
    }
}

/// Decoded raster, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: Channels,
    pixels: Vec<u16>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: Channels,
        pixels: Vec<u16>,
    ) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::ZeroDimension);
        }
        if pixels.len() != width * height * channels.count() {
            return Err(ImagingError::BufferSize {
                width,
                height,
                channels: channels.count(),
                actual: pixels.len(),
            });
        }
        let max = channels.depth_max();
        if let Some(&p) = pixels.iter().find(|&&p| p > max) {
            return Err(ImagingError::UnsupportedFormat(format!(
                "sample {p} exceeds {channels:?} range"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Single-channel image filled with `value`.
    pub fn filled(width: usize, height: usize, channels: Channels, value: u16) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels.count()],
        )
        .expect("filled image parameters are valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn depth_max(&self) -> u16 {
        self.channels.depth_max()
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u16> {
        self.pixels
    }

    /// Sample at column `x`, row `y`, channel `c`.
    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u16 {
        self.pixels[(y * self.width + x) * self.channels.count() + c]
    }

    /// Rotates a single- or multi-channel image by 90° clockwise.
    pub fn rotate90(&self) -> RasterImage {
        let (w, h, cc) = (self.width, self.height, self.channels.count());
        let mut out = vec![0u16; self.pixels.len()];
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (h - 1 - y, x) in a h-wide image
                let nx = h - 1 - y;
                let ny = x;
                for c in 0..cc {
                    out[(ny * h + nx) * cc + c] = self.get(x, y, c);
                }
            }
        }
        RasterImage {
            width: h,
            height: w,
            channels: self.channels,
            pixels: out,
        }
    }

    /// Encodes as PNG (8-bit RGB/gray or 16-bit gray).
    pub fn encode_png(&self) -> Result<Vec<u8>, image::ImageError> {
        let (w, h) = (self.width as u32, self.height as u32);
        let narrow = || self.pixels.iter().map(|&p| p as u8).collect::<Vec<u8>>();
        let dynamic = match self.channels {
            Channels::Gray8 => DynamicImage::ImageLuma8(
                ImageBuffer::<Luma<u8>, _>::from_raw(w, h, narrow()).expect("buffer sized from dimensions"),
            ),
            Channels::Gray16 => DynamicImage::ImageLuma16(
                ImageBuffer::<Luma<u16>, _>::from_raw(w, h, self.pixels.clone())
                    .expect("buffer sized from dimensions"),
            ),
            Channels::Rgb8 => DynamicImage::ImageRgb8(
                ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, narrow()).expect("buffer sized from dimensions"),
            ),
        };
        let mut out = std::io::Cursor::new(Vec::new());
        dynamic.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), ImagingError> {
        let encode_err = |source| ImagingError::Encode {
            path: path.display().to_string(),
            source,
        };
        let bytes = self.encode_png().map_err(encode_err)?;
        std::fs::write(path, bytes)
            .map_err(|e| encode_err(image::ImageError::IoError(e)))
    }
}

/// Preprocessing parameters shared by both modalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Square edge length after resizing.
    pub target_size: usize,
    pub clahe_clip_limit: f64,
    /// Tiles per axis.
    pub clahe_tile_grid: usize,
    /// Quantisation levels for GLCM and histogram entropy.
    pub gray_levels: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_size: 512,
            clahe_clip_limit: 2.0,
            clahe_tile_grid: 8,
            gray_levels: 32,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), ImagingError> {
        if self.target_size < 32 {
            return Err(ImagingError::Config(format!(
                "target_size must be >= 32, got {}",
                self.target_size
            )));
        }
        if !(2..=256).contains(&self.gray_levels) {
            return Err(ImagingError::Levels(self.gray_levels));
        }
        if !(self.clahe_clip_limit > 0.0 && self.clahe_clip_limit.is_finite()) {
            return Err(ImagingError::Config(format!(
                "clahe_clip_limit must be > 0, got {}",
                self.clahe_clip_limit
            )));
        }
        if self.clahe_tile_grid == 0 {
            return Err(ImagingError::Config("clahe_tile_grid must be >= 1".into()));
        }
        Ok(())
    }
}

/// Decodes PNG, JPEG or TIFF. 16-bit grayscale is kept at full depth.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage, ImagingError> {
    let path = path.as_ref();
    let decoded = image::ImageReader::open(path)
        .map_err(|e| ImagingError::Decode {
            path: path.display().to_string(),
            source: image::ImageError::IoError(e),
        })?
        .with_guessed_format()
        .map_err(|e| ImagingError::Decode {
            path: path.display().to_string(),
            source: image::ImageError::IoError(e),
        })?
        .decode()
        .map_err(|source| ImagingError::Decode {
            path: path.display().to_string(),
            source,
        })?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<RasterImage, ImagingError> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(ImagingError::ZeroDimension);
    }
    match img {
        DynamicImage::ImageLuma8(buf) => {
            RasterImage::new(w, h, Channels::Gray8, widen(buf.into_raw()))
        }
        DynamicImage::ImageLumaA8(_) => {
            RasterImage::new(w, h, Channels::Gray8, widen(img.to_luma8().into_raw()))
        }
        DynamicImage::ImageLuma16(buf) => RasterImage::new(w, h, Channels::Gray16, buf.into_raw()),
        DynamicImage::ImageLumaA16(_) => {
            RasterImage::new(w, h, Channels::Gray16, img.to_luma16().into_raw())
        }
        DynamicImage::ImageRgb8(buf) => RasterImage::new(w, h, Channels::Rgb8, widen(buf.into_raw())),
        DynamicImage::ImageRgba8(_) => {
            RasterImage::new(w, h, Channels::Rgb8, widen(img.to_rgb8().into_raw()))
        }
        other => Err(ImagingError::UnsupportedFormat(format!(
            "{:?}",
            other.color()
        ))),
    }
}

fn widen(raw: Vec<u8>) -> Vec<u16> {
    raw.into_iter().map(u16::from).collect()
}

/// Luminance conversion `0.299R + 0.587G + 0.114B`, rounded half-up.
///
/// Grayscale input is returned unchanged.
pub fn to_grayscale(img: &RasterImage) -> RasterImage {
    if img.channels.is_gray() {
        return img.clone();
    }
    // Integer weights in thousandths keep the rounding exact.
    let pixels = img
        .pixels
        .chunks_exact(3)
        .map(|rgb| {
            let acc = 299 * rgb[0] as u32 + 587 * rgb[1] as u32 + 114 * rgb[2] as u32;
            ((acc + 500) / 1000) as u16
        })
        .collect();
    RasterImage {
        width: img.width,
        height: img.height,
        channels: Channels::Gray8,
        pixels,
    }
}

/// Maps each sample to `floor(p * levels / (depth_max + 1))`.
///
/// The result keeps the input's channel tag; its samples lie in
/// `[0, levels - 1]`.
pub fn quantise(img: &RasterImage, levels: usize) -> Result<RasterImage, ImagingError> {
    if !img.channels.is_gray() {
        return Err(ImagingError::NotGrayscale);
    }
    if !(2..=256).contains(&levels) {
        return Err(ImagingError::Levels(levels));
    }
    let span = img.depth_max() as u64 + 1;
    let pixels = img
        .pixels
        .iter()
        .map(|&p| (p as u64 * levels as u64 / span) as u16)
        .collect();
    Ok(RasterImage {
        width: img.width,
        height: img.height,
        channels: img.channels,
        pixels,
    })
}

/// Min-max stretch of a single-channel image to its full depth range.
///
/// Stands in for radiograph exposure correction. Flat images are returned
/// unchanged.
pub fn stretch_to_depth(img: &RasterImage) -> Result<RasterImage, ImagingError> {
    if !img.channels.is_gray() {
        return Err(ImagingError::NotGrayscale);
    }
    let lo = *img.pixels.iter().min().expect("non-empty raster") as u64;
    let hi = *img.pixels.iter().max().expect("non-empty raster") as u64;
    if hi == lo {
        return Ok(img.clone());
    }
    let max = img.depth_max() as u64;
    let range = hi - lo;
    let pixels = img
        .pixels
        .iter()
        .map(|&p| (((p as u64 - lo) * max + range / 2) / range) as u16)
        .collect();
    Ok(RasterImage {
        width: img.width,
        height: img.height,
        channels: img.channels,
        pixels,
    })
}

/// Intensities divided by the depth maximum, in `[0, 1]`.
pub fn normalised_intensities(img: &RasterImage) -> Vec<f64> {
    let max = img.depth_max() as f64;
    img.pixels.iter().map(|&p| p as f64 / max).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grayscale_weights() {
        let img = RasterImage::new(
            3,
            1,
            Channels::Rgb8,
            vec![255, 255, 255, 255, 0, 0, 0, 0, 0],
        )
        .unwrap();
        let g = to_grayscale(&img);
        assert_eq!(g.channels(), Channels::Gray8);
        assert_eq!(g.pixels(), &[255, 76, 0]);
    }

    #[test]
    fn grayscale_passthrough() {
        let img = RasterImage::new(2, 1, Channels::Gray16, vec![0, 65535]).unwrap();
        assert_eq!(to_grayscale(&img), img);
    }

    #[test]
    fn quantise_examples() {
        let img = RasterImage::new(3, 1, Channels::Gray8, vec![255, 0, 128]).unwrap();
        let q = quantise(&img, 32).unwrap();
        assert_eq!(q.pixels(), &[31, 0, 16]);
        assert!(matches!(quantise(&img, 1), Err(ImagingError::Levels(1))));
        assert!(matches!(quantise(&img, 257), Err(ImagingError::Levels(257))));
    }

    #[test]
    fn quantise_sixteen_bit_directly() {
        let img = RasterImage::new(3, 1, Channels::Gray16, vec![65535, 255, 2048]).unwrap();
        let q = quantise(&img, 32).unwrap();
        // 255 would land in the top bin if the raster had been truncated to 8 bits
        assert_eq!(q.pixels(), &[31, 0, 1]);
    }

    #[test]
    fn quantise_rejects_colour() {
        let img = RasterImage::filled(2, 2, Channels::Rgb8, 3);
        assert!(matches!(quantise(&img, 8), Err(ImagingError::NotGrayscale)));
    }

    #[test]
    fn buffer_validation() {
        assert!(matches!(
            RasterImage::new(0, 2, Channels::Gray8, vec![]),
            Err(ImagingError::ZeroDimension)
        ));
        assert!(matches!(
            RasterImage::new(2, 2, Channels::Rgb8, vec![0; 4]),
            Err(ImagingError::BufferSize { .. })
        ));
        assert!(RasterImage::new(1, 1, Channels::Gray8, vec![256]).is_err());
    }

    #[test]
    fn stretch_fills_range() {
        let img = RasterImage::new(3, 1, Channels::Gray16, vec![1000, 2000, 3000]).unwrap();
        let s = stretch_to_depth(&img).unwrap();
        assert_eq!(s.pixels(), &[0, 32768, 65535]);
        let flat = RasterImage::filled(2, 2, Channels::Gray8, 9);
        assert_eq!(stretch_to_depth(&flat).unwrap(), flat);
    }

    #[test]
    fn rotate_four_times_is_identity() {
        let img = RasterImage::new(3, 2, Channels::Gray8, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let r = img.rotate90();
        assert_eq!((r.width(), r.height()), (2, 3));
        assert_eq!(r.pixels(), &[4, 1, 5, 2, 6, 3]);
        assert_eq!(r.rotate90().rotate90().rotate90(), img);
    }

    #[test]
    fn png_round_trip_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = RasterImage::new(2, 2, Channels::Gray8, vec![0, 255, 0, 255]).unwrap();
        img.save_png(&path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn png_sixteen_bit_depth_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = RasterImage::new(2, 1, Channels::Gray16, vec![65535, 12]).unwrap();
        img.save_png(&path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.channels(), Channels::Gray16);
        assert_eq!(*back.pixels().iter().max().unwrap(), 65535);
    }

    #[test]
    fn tiff_sixteen_bit_depth_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tiff");
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(2, 2, vec![0, 65535, 300, 40000]).unwrap();
        buf.save_with_format(&path, image::ImageFormat::Tiff).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.channels(), Channels::Gray16);
        assert_eq!(back.pixels(), &[0, 65535, 300, 40000]);
    }

    #[test]
    fn truncated_file_is_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = RasterImage::filled(16, 16, Channels::Rgb8, 40);
        img.save_png(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_image(&path), Err(ImagingError::Decode { .. })));
    }

    #[test]
    fn missing_file_is_error() {
        assert!(load_image("/nonexistent/nope.png").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PreprocessConfig::default().validate().is_ok());
        let bad = PreprocessConfig {
            target_size: 16,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PreprocessConfig {
            clahe_clip_limit: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn quantise_output_in_range(
            pixels in proptest::collection::vec(0u16..=255, 1..200),
            levels in 2usize..=256,
        ) {
            let n = pixels.len();
            let img = RasterImage::new(n, 1, Channels::Gray8, pixels).unwrap();
            let q = quantise(&img, levels).unwrap();
            prop_assert!(q.pixels().iter().all(|&p| (p as usize) < levels));
        }
    }
}
