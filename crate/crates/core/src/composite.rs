//! Applying a mask to an image.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ImageBuffer, Rgb};
use crate::mask::Mask;

/// ImageNet channel means (0.485, 0.456, 0.406) scaled to 8 bits and rounded.
pub const DATASET_MEAN_RGB: Rgb = [124, 116, 104];

/// Pixel values that occluded cells take before inference.
///
/// Serialized as `{"kind": "dataset_mean"}` or
/// `{"kind": "constant_color", "color": [r, g, b]}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FillPolicy {
    ConstantColor {
        color: Rgb,
    },
    #[default]
    DatasetMean,
}

impl FillPolicy {
    pub const BLACK: FillPolicy = FillPolicy::ConstantColor { color: [0, 0, 0] };

    pub fn color(&self) -> Rgb {
        match self {
            FillPolicy::ConstantColor { color } => *color,
            FillPolicy::DatasetMean => DATASET_MEAN_RGB,
        }
    }
}

/// Accepts `mean`, `black`, `white`, or `#RRGGBB`.
impl FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "dataset_mean" => Ok(FillPolicy::DatasetMean),
            "black" => Ok(FillPolicy::BLACK),
            "white" => Ok(FillPolicy::ConstantColor {
                color: [255, 255, 255],
            }),
            hex if hex.len() == 7 && hex.starts_with('#') => {
                let channel = |i: usize| {
                    u8::from_str_radix(&hex[i..i + 2], 16)
                        .map_err(|_| Error::Argument(format!("bad hex color {s:?}")))
                };
                Ok(FillPolicy::ConstantColor {
                    color: [channel(1)?, channel(3)?, channel(5)?],
                })
            }
            _ => Err(Error::Argument(format!(
                "unknown fill {s:?}; expected mean, black, white or #RRGGBB"
            ))),
        }
    }
}

impl fmt::Display for FillPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FillPolicy::DatasetMean => f.write_str("dataset_mean"),
            FillPolicy::ConstantColor { color: [r, g, b] } => write!(f, "#{r:02x}{g:02x}{b:02x}"),
        }
    }
}

/// Replaces every painted pixel with the fill color; visible pixels are copied unchanged.
pub fn composite(image: &ImageBuffer, mask: &Mask, fill: FillPolicy) -> Result<ImageBuffer> {
    if image.dimensions() != mask.dimensions() {
        return Err(Error::shape(
            format!("mask {}x{}", image.width(), image.height()),
            format!("mask {}x{}", mask.width(), mask.height()),
        ));
    }
    let color = fill.color();
    let mut data = image.as_raw().to_vec();
    for (px, &bit) in data.chunks_exact_mut(3).zip(mask.bits()) {
        if bit != 0 {
            px.copy_from_slice(&color);
        }
    }
    ImageBuffer::from_raw(image.width(), image.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: Rgb = [255, 0, 0];
    const G: Rgb = [0, 255, 0];
    const B: Rgb = [0, 0, 255];
    const W: Rgb = [255, 255, 255];

    fn quad() -> ImageBuffer {
        ImageBuffer::from_fn(2, 2, |x, y| [[R, G], [B, W]][y as usize][x as usize]).unwrap()
    }

    #[test]
    fn dataset_mean_matches_scaled_imagenet_means() {
        let scaled: Vec<u8> = [0.485f64, 0.456, 0.406]
            .iter()
            .map(|m| (m * 255.0).round() as u8)
            .collect();
        assert_eq!(scaled, DATASET_MEAN_RGB);
        assert_eq!(FillPolicy::default().color(), [124, 116, 104]);
    }

    #[test]
    fn empty_mask_is_identity() {
        let img = quad();
        let out = composite(&img, &Mask::new(2, 2).unwrap(), FillPolicy::BLACK).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn full_mask_gives_constant_image() {
        let out = composite(&quad(), &Mask::filled(2, 2, true).unwrap(), FillPolicy::BLACK).unwrap();
        assert!(out.pixels().all(|p| p == [0, 0, 0]));
    }

    #[test]
    fn single_cell_with_dataset_mean() {
        let mask = Mask::from_bits(2, 2, vec![1, 0, 0, 0]).unwrap();
        let out = composite(&quad(), &mask, FillPolicy::DatasetMean).unwrap();
        let got: Vec<Rgb> = out.pixels().collect();
        assert_eq!(got, vec![[124, 116, 104], G, B, W]);
    }

    #[test]
    fn dimension_mismatch_is_a_shape_error() {
        let err = composite(&quad(), &Mask::new(3, 2).unwrap(), FillPolicy::DatasetMean);
        assert!(matches!(err, Err(Error::Shape { .. })));
    }

    #[test]
    fn parse_fill_names() {
        assert_eq!("mean".parse::<FillPolicy>().unwrap(), FillPolicy::DatasetMean);
        assert_eq!("black".parse::<FillPolicy>().unwrap(), FillPolicy::BLACK);
        assert_eq!(
            "#FF8000".parse::<FillPolicy>().unwrap(),
            FillPolicy::ConstantColor {
                color: [255, 128, 0]
            }
        );
        assert!("#GG0000".parse::<FillPolicy>().is_err());
        assert!("red".parse::<FillPolicy>().is_err());
        assert_eq!(FillPolicy::BLACK.to_string(), "#000000");
    }

    #[test]
    fn fill_json_shape() {
        assert_eq!(
            serde_json::to_string(&FillPolicy::DatasetMean).unwrap(),
            r#"{"kind":"dataset_mean"}"#
        );
        let parsed: FillPolicy =
            serde_json::from_str(r#"{"kind":"constant_color","color":[1,2,3]}"#).unwrap();
        assert_eq!(parsed, FillPolicy::ConstantColor { color: [1, 2, 3] });
    }
}
