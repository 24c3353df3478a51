//! Image curation: decoding, bilinear resizing, seeded shuffling, affine and
//! photometric augmentation, normalization and quality screening.

mod augment;
mod canny;
mod pipeline;
mod quality;
mod resize;
mod tensor;

pub use augment::{augment, AugmentParams, AugmentSpec, Interval};
pub use canny::{canny_edge_density, canny_edges, CANNY_HIGH_RATIO, CANNY_LOW_RATIO};
pub use pipeline::{run_prep_pipeline, FailedImage, PrepOptions, PrepOutcome, PrepReport};
pub use quality::{psnr, reencode_psnr};
pub use resize::resize_bilinear;
pub use tensor::{read_tensor, tensor_bytes, TENSOR_MAGIC};

use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{Seed, SeededRng};

pub const CHANNELS: usize = 3;

/// Sample storage; the variant doubles as the depth flag.
#[derive(Clone, Debug, PartialEq)]
pub enum Pixels {
    U8(Vec<u8>),
    /// Samples scaled to [0, 1].
    Normalized(Vec<f32>),
}

/// Row-major interleaved RGB image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Pixels,
}

impl ImageBuffer {
    pub fn from_rgb8(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(ImageBuffer {
            width,
            height,
            pixels: Pixels::U8(data),
        })
    }

    pub fn from_normalized(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        check_len(width, height, data.len())?;
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Validation("normalized samples must lie in [0, 1]".into()));
        }
        Ok(ImageBuffer {
            width,
            height,
            pixels: Pixels::Normalized(data),
        })
    }

    /// Every pixel set to the same RGB value.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let n = width as usize * height as usize;
        let data = rgb.iter().copied().cycle().take(n * CHANNELS).collect();
        ImageBuffer {
            width,
            height,
            pixels: Pixels::U8(data),
        }
    }

    /// Build an 8-bit image from a per-pixel function.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        ImageBuffer {
            width,
            height,
            pixels: Pixels::U8(data),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &Pixels {
        &self.pixels
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.pixels, Pixels::Normalized(_))
    }

    /// 8-bit samples, or a validation error for normalized images.
    pub fn as_u8(&self) -> Result<&[u8]> {
        match &self.pixels {
            Pixels::U8(d) => Ok(d),
            Pixels::Normalized(_) => Err(Error::Validation("expected an 8-bit image".into())),
        }
    }

    pub fn rgb(&self, x: u32, y: u32) -> Option<[u8; 3]> {
        let Pixels::U8(d) = &self.pixels else { return None };
        if x >= self.width || y >= self.height {
            return None;
        }
        let i = (y as usize * self.width as usize + x as usize) * CHANNELS;
        Some([d[i], d[i + 1], d[i + 2]])
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes)?.to_rgb8();
        let (w, h) = img.dimensions();
        ImageBuffer::from_rgb8(w, h, img.into_raw())
    }

    pub fn open(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        use image::ImageEncoder;
        let data = self.as_u8()?;
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out).write_image(
            data,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(out)
    }

    /// Binary PPM (P6).
    pub fn encode_ppm(&self) -> Result<Vec<u8>> {
        let data = self.as_u8()?;
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(data);
        Ok(out)
    }
}

fn check_len(width: u32, height: u32, len: usize) -> Result<()> {
    let expected = width as usize * height as usize * CHANNELS;
    if len != expected {
        return Err(Error::Validation(format!(
            "{width}x{height} RGB image needs {expected} samples, got {len}"
        )));
    }
    Ok(())
}

/// Scale 8-bit samples to [0, 1]. Normalizing twice is an error.
pub fn normalize(img: &ImageBuffer) -> Result<ImageBuffer> {
    match &img.pixels {
        Pixels::U8(d) => Ok(ImageBuffer {
            width: img.width,
            height: img.height,
            pixels: Pixels::Normalized(d.iter().map(|v| *v as f32 / 255.0).collect()),
        }),
        Pixels::Normalized(_) => Err(Error::Validation("image is already normalized".into())),
    }
}

/// Fisher-Yates shuffle of a copy of `items`.
pub fn fisher_yates_shuffle<T: Clone>(items: &[T], seed: Seed) -> Vec<T> {
    let mut out = items.to_vec();
    fisher_yates_in_place(&mut out, &mut seed.rng());
    out
}

pub(crate) fn fisher_yates_in_place<T>(items: &mut [T], rng: &mut SeededRng) {
    for i in (1..items.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn normalize_scales_and_flags_depth() {
        let img = ImageBuffer::from_rgb8(1, 1, vec![255, 0, 51]).unwrap();
        let n = normalize(&img).unwrap();
        let Pixels::Normalized(d) = n.pixels() else { panic!() };
        assert_eq!(d[0], 1.0);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 0.2);
        assert_eq!(d[2], (51.0f64 / 255.0) as f32);
        assert!(normalize(&n).is_err());
    }

    #[test]
    fn buffer_length_is_checked() {
        assert!(ImageBuffer::from_rgb8(2, 2, vec![0; 11]).is_err());
        assert!(ImageBuffer::from_normalized(1, 1, vec![0.0, 0.5, 1.5]).is_err());
    }

    #[test]
    fn png_and_ppm_decode_round_trip() {
        let img = ImageBuffer::from_fn(5, 3, |x, y| [x as u8 * 40, y as u8 * 80, 7]);
        assert_eq!(ImageBuffer::decode(&img.encode_png().unwrap()).unwrap(), img);
        assert_eq!(ImageBuffer::decode(&img.encode_ppm().unwrap()).unwrap(), img);
    }

    #[test]
    fn shuffle_of_empty_list() {
        assert!(fisher_yates_shuffle::<u32>(&[], Seed(1)).is_empty());
    }

    #[test]
    fn shuffle_is_deterministic_permutation() {
        let ids: Vec<String> = (0..50).map(|i| format!("id{i}")).collect();
        let a = fisher_yates_shuffle(&ids, Seed(9));
        let b = fisher_yates_shuffle(&ids, Seed(9));
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        let mut orig = ids.clone();
        orig.sort();
        assert_eq!(sorted, orig);
        assert_ne!(a, fisher_yates_shuffle(&ids, Seed(10)));
    }

    #[test]
    fn shuffle_is_uniform_over_three_elements() {
        let mut freq: HashMap<Vec<u8>, usize> = HashMap::new();
        let trials = 60_000u64;
        for s in 0..trials {
            *freq.entry(fisher_yates_shuffle(&[0u8, 1, 2], Seed(s))).or_default() += 1;
        }
        assert_eq!(freq.len(), 6);
        for (perm, n) in freq {
            let f = n as f64 / trials as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.01, "{perm:?}: {f}");
        }
    }
}
