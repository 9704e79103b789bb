//! Binary occlusion masks.
//!
//! A [`Mask`] is a row-major grid of cells aligned with an [`ImageBuffer`](crate::ImageBuffer):
//! `1` marks a painted (occluded) pixel, `0` a visible one. On the wire a mask
//! is a single-channel 8-bit PNG where painted cells are `255` and visible
//! cells are `0`; any other value is rejected.

use std::io::Cursor;

use image::{ImageDecoder, ImageEncoder};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Channel value used for painted cells in the transport raster.
pub const PAINTED_VALUE: u8 = 255;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<u8>,
}

impl Mask {
    /// All-zero mask.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        Self::filled(width, height, false)
    }

    pub fn filled(width: u32, height: u32, painted: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimension { width, height });
        }
        Ok(Self {
            width,
            height,
            bits: vec![painted as u8; width as usize * height as usize],
        })
    }

    /// Builds a mask from row-major cells. Every cell must be 0 or 1.
    pub fn from_bits(width: u32, height: u32, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimension { width, height });
        }
        if bits.len() != width as usize * height as usize {
            return Err(Error::shape(
                format!("{} cells", width as usize * height as usize),
                format!("{} cells", bits.len()),
            ));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidMask(format!("cell value {bad} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                mask.set(x, y, f(x, y));
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        assert!(x < self.width && y < self.height, "cell ({x}, {y}) out of bounds");
        self.bits[y as usize * self.width as usize + x as usize] != 0
    }

    pub fn set(&mut self, x: u32, y: u32, painted: bool) {
        assert!(x < self.width && y < self.height, "cell ({x}, {y}) out of bounds");
        self.bits[y as usize * self.width as usize + x as usize] = painted as u8;
    }

    /// Row-major cells, each 0 or 1.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn painted_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    /// Fraction of painted cells, in `[0, 1]`.
    pub fn coverage(&self) -> f64 {
        self.painted_count() as f64 / self.bits.len() as f64
    }

    /// Encodes as a single-channel 8-bit PNG (0 visible, 255 painted).
    pub fn encode(&self) -> Vec<u8> {
        let raster: Vec<u8> = self.bits.iter().map(|&b| b * PAINTED_VALUE).collect();
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(&raster, self.width, self.height, image::ExtendedColorType::L8)
            .expect("PNG encoding into memory cannot fail for a valid L8 buffer");
        out
    }

    /// Decodes a single-channel 8-bit lossless raster. Values other than 0 and 255 are rejected.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() {
            return Err(Error::Parse("empty mask payload".into()));
        }
        let format = image::guess_format(bytes).map_err(|e| Error::Parse(e.to_string()))?;
        if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Bmp) {
            return Err(Error::Parse(format!(
                "mask must be a lossless raster, got {format:?}"
            )));
        }
        let reader = image::ImageReader::with_format(Cursor::new(bytes), format);
        let decoder = reader
            .into_decoder()
            .map_err(|e| Error::Parse(e.to_string()))?;
        let color = decoder.color_type();
        if color != image::ColorType::L8 {
            return Err(Error::InvalidMask(format!(
                "expected single-channel 8-bit raster, got {color:?}"
            )));
        }
        let (width, height) = decoder.dimensions();
        let mut raster = vec![0u8; decoder.total_bytes() as usize];
        decoder
            .read_image(&mut raster)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let bits = raster
            .iter()
            .map(|&v| match v {
                0 => Ok(0),
                PAINTED_VALUE => Ok(1),
                other => Err(Error::InvalidMask(format!(
                    "channel value {other} is neither 0 nor {PAINTED_VALUE}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(width, height, bits)
    }

    /// SHA-256 over the dimensions and cell grid, hex encoded.
    ///
    /// Independent of the PNG encoder, so recomputing it from a stored file
    /// only requires decoding that file.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"xai-mask-v1\0");
        hasher.update(self.width.to_le_bytes());
        hasher.update(self.height.to_le_bytes());
        hasher.update(&self.bits);
        hex::encode(hasher.finalize())
    }
}

impl std::fmt::Debug for Mask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.bits.len() <= 64 {
            let rows: Vec<String> = self
                .bits
                .chunks(self.width as usize)
                .map(|r| r.iter().map(|b| if *b != 0 { '#' } else { '.' }).collect())
                .collect();
            write!(f, "Mask {}x{} [{}]", self.width, self.height, rows.join("/"))
        } else {
            write!(
                f,
                "Mask {}x{} ({} painted)",
                self.width,
                self.height,
                self.painted_count()
            )
        }
    }
}
