//! The full classification path shared by the service and the harness:
//! composite (optional) → resize → normalize → infer → softmax → top-k.

use std::time::Instant;

use crate::composite::{composite, FillPolicy};
use crate::error::Result;
use crate::image::ImageBuffer;
use crate::mask::Mask;
use crate::model::ModelHandle;
use crate::preprocess::{normalize, prepare, Preprocessing};
use crate::scoring::{softmax, top_k, ClassificationResponse};

/// Full probability vector from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub probs: Vec<f64>,
    pub model_id: String,
    pub inference_millis: f64,
}

impl Scored {
    pub fn response(&self, model: &ModelHandle, k: usize) -> Result<ClassificationResponse> {
        Ok(ClassificationResponse {
            top: top_k(&self.probs, k, model.labels())?,
            model_id: self.model_id.clone(),
            inference_millis: self.inference_millis,
        })
    }
}

/// A model plus the preprocessing variant applied before it.
#[derive(Debug, Clone)]
pub struct Pipeline {
    model: ModelHandle,
    preprocessing: Preprocessing,
}

impl Pipeline {
    pub fn new(model: ModelHandle, preprocessing: Preprocessing) -> Self {
        Self {
            model,
            preprocessing,
        }
    }

    pub fn model(&self) -> &ModelHandle {
        &self.model
    }

    pub fn preprocessing(&self) -> Preprocessing {
        self.preprocessing
    }

    pub fn score(&self, image: &ImageBuffer) -> Result<Scored> {
        let started = Instant::now();
        let input = normalize(&prepare(image, self.preprocessing))?;
        let logits = self.model.infer(&input)?;
        let probs = softmax(logits.values())?;
        Ok(Scored {
            probs,
            model_id: self.model.model_id().to_string(),
            inference_millis: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn classify(&self, image: &ImageBuffer, k: usize) -> Result<ClassificationResponse> {
        self.score(image)?.response(&self.model, k)
    }

    /// Composites at the image's own resolution, then classifies.
    pub fn score_masked(&self, image: &ImageBuffer, mask: &Mask, fill: FillPolicy) -> Result<Scored> {
        self.score(&composite(image, mask, fill)?)
    }

    pub fn classify_masked(
        &self,
        image: &ImageBuffer,
        mask: &Mask,
        fill: FillPolicy,
        k: usize,
    ) -> Result<ClassificationResponse> {
        self.classify(&composite(image, mask, fill)?, k)
    }
}

/// Classifies with the default (direct resize) preprocessing.
pub fn classify(model: &ModelHandle, image: &ImageBuffer, k: usize) -> Result<ClassificationResponse> {
    Pipeline::new(model.clone(), Preprocessing::default()).classify(image, k)
}
