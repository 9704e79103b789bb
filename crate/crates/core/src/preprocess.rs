//! Image decoding and ImageNet-style input preparation.
//!
//! The default path resizes the full frame straight to 224x224 (bilinear, no
//! crop) so painted regions near the border still reach the model. The
//! resize-256/center-crop-224 variant is available for parity studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

pub const INPUT_SIZE: u32 = 224;
pub const INPUT_LEN: usize = 3 * (INPUT_SIZE as usize) * (INPUT_SIZE as usize);
pub const CROP_RESIZE: u32 = 256;

pub const IMAGENET_MEAN: [f32; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STD: [f32; 3] = [0.229, 0.224, 0.225];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    /// Bilinear resize of the whole frame to 224x224.
    #[default]
    DirectResize,
    /// Resize the short side to 256, then take the central 224x224 window.
    ResizeCenterCrop,
}

impl std::fmt::Display for Preprocessing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preprocessing::DirectResize => "direct_resize_224",
            Preprocessing::ResizeCenterCrop => "resize_256_center_crop_224",
        })
    }
}

impl std::str::FromStr for Preprocessing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" | "direct_resize" | "direct_resize_224" => Ok(Preprocessing::DirectResize),
            "crop" | "center_crop" | "resize_center_crop" | "resize_256_center_crop_224" => {
                Ok(Preprocessing::ResizeCenterCrop)
            }
            other => Err(Error::Argument(format!(
                "unknown preprocessing {other:?}; expected direct or crop"
            ))),
        }
    }
}

/// Normalized network input, channel-major `1 x 3 x 224 x 224`.
#[derive(Clone, PartialEq)]
pub struct InputTensor {
    data: Vec<f32>,
}

impl InputTensor {
    pub const SHAPE: [usize; 4] = [1, 3, INPUT_SIZE as usize, INPUT_SIZE as usize];

    /// Wraps raw values; only the length is checked here; finiteness is checked at inference.
    pub fn from_raw(data: Vec<f32>) -> Result<Self> {
        if data.len() != INPUT_LEN {
            return Err(Error::shape(
                format!("{INPUT_LEN} values (1x3x224x224)"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self { data })
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<f32> {
        self.data
    }

    /// Value at channel `c`, row `y`, column `x`.
    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        let side = INPUT_SIZE as usize;
        self.data[(c * side + y) * side + x]
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let plane = (INPUT_SIZE * INPUT_SIZE) as usize;
        &self.data[c * plane..(c + 1) * plane]
    }
}

impl std::fmt::Debug for InputTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InputTensor{:?}", Self::SHAPE)
    }
}

/// Decodes PNG, JPEG, BMP or WebP bytes to RGB8. Alpha is composited over white.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    if !decoded.color().has_alpha() {
        return Ok(ImageBuffer::from_rgb_image(decoded.into_rgb8()));
    }
    let rgba = decoded.into_rgba8();
    let (w, h) = rgba.dimensions();
    let mut data = Vec::with_capacity(3 * w as usize * h as usize);
    for px in rgba.pixels() {
        let a = px[3] as u32;
        for c in 0..3 {
            // round(c * a/255 + 255 * (1 - a/255))
            data.push(((px[c] as u32 * a + 255 * (255 - a) + 127) / 255) as u8);
        }
    }
    ImageBuffer::from_raw(w, h, data)
}

fn resize_exact(image: &ImageBuffer, width: u32, height: u32) -> ImageBuffer {
    if image.dimensions() == (width, height) {
        return image.clone();
    }
    let resized = image::imageops::resize(
        &image.to_rgb_image(),
        width,
        height,
        image::imageops::FilterType::Triangle,
    );
    ImageBuffer::from_rgb_image(resized)
}

/// Bilinear resize of the whole frame to 224x224.
pub fn resize_to_input(image: &ImageBuffer) -> ImageBuffer {
    resize_exact(image, INPUT_SIZE, INPUT_SIZE)
}

/// Short side to 256 (aspect preserved), then the central 224x224 window.
pub fn resize_center_crop(image: &ImageBuffer) -> ImageBuffer {
    let (w, h) = image.dimensions();
    let (nw, nh) = if w <= h {
        (CROP_RESIZE, (CROP_RESIZE as u64 * h as u64 / w as u64) as u32)
    } else {
        ((CROP_RESIZE as u64 * w as u64 / h as u64) as u32, CROP_RESIZE)
    };
    let resized = resize_exact(image, nw, nh);
    let left = ((nw - INPUT_SIZE) as f64 / 2.0).round() as u32;
    let top = ((nh - INPUT_SIZE) as f64 / 2.0).round() as u32;
    ImageBuffer::from_fn(INPUT_SIZE, INPUT_SIZE, |x, y| resized.pixel(x + left, y + top))
        .expect("crop window is non-empty")
}

pub fn prepare(image: &ImageBuffer, preprocessing: Preprocessing) -> ImageBuffer {
    match preprocessing {
        Preprocessing::DirectResize => resize_to_input(image),
        Preprocessing::ResizeCenterCrop => resize_center_crop(image),
    }
}

/// `(pixel / 255 - mean_c) / std_c` per channel, channel-major.
pub fn normalize(image: &ImageBuffer) -> Result<InputTensor> {
    if image.dimensions() != (INPUT_SIZE, INPUT_SIZE) {
        return Err(Error::shape(
            "224x224 image",
            format!("{}x{}", image.width(), image.height()),
        ));
    }
    let plane = (INPUT_SIZE * INPUT_SIZE) as usize;
    let mut data = vec![0f32; INPUT_LEN];
    for (i, px) in image.pixels().enumerate() {
        for c in 0..3 {
            data[c * plane + i] = (px[c] as f32 / 255.0 - IMAGENET_MEAN[c]) / IMAGENET_STD[c];
        }
    }
    InputTensor::from_raw(data)
}
