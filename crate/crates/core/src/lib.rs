//! Building blocks for probing an image classifier by occlusion.
//!
//! Users paint regions of an image ([`Stroke`] onto a [`Mask`]), the masked
//! pixels are replaced according to a [`FillPolicy`], and the result is run
//! through an ImageNet classifier ([`Pipeline`]). Comparing the ranked
//! confidences before and after masking shows which regions the model
//! relies on.

pub mod composite;
pub mod error;
pub mod image;
pub mod labels;
pub mod mask;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod scoring;
pub mod stroke;

pub use crate::composite::{composite, FillPolicy, DATASET_MEAN_RGB};
pub use crate::error::{Error, LoadError, Result};
pub use crate::image::{ImageBuffer, Rgb};
pub use crate::labels::{LabelTable, NUM_CLASSES};
pub use crate::mask::Mask;
pub use crate::model::{infer, load_model, open_model, Backend, FixedBackend, ModelHandle, OnnxBackend, StubBackend};
pub use crate::pipeline::{classify, Pipeline, Scored};
pub use crate::preprocess::{
    decode_image, normalize, resize_center_crop, resize_to_input, InputTensor, Preprocessing,
};
pub use crate::scoring::{
    argmax, softmax, top_k, ClassificationResponse, ClassificationResult, LogitVector,
};
pub use crate::stroke::{apply_stroke, Point, Stroke, StrokeMode, DEFAULT_BRUSH_RADIUS};
