//! Classifier backends and the loaded-model handle.
//!
//! Two backends ship with the crate: [`OnnxBackend`], which runs a serialized
//! ImageNet network (e.g. a ResNet-50 export) through tract, and
//! [`StubBackend`], a fixed linear map from mean patch intensities to logits
//! used for deterministic tests. Both run single-threaded, so repeated calls
//! on the same input are bit-identical.

use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use tract_onnx::prelude::*;
use tract_onnx::tract_hir::infer::Factoid;

use crate::error::{Error, LoadError, Result};
use crate::labels::{LabelTable, NUM_CLASSES};
use crate::preprocess::{InputTensor, INPUT_SIZE};
use crate::scoring::LogitVector;

/// A network mapping a `1x3x224x224` tensor to raw class scores.
///
/// Implementations must be reentrant: `forward` may be called from many
/// threads at once and must return what a serial call would.
pub trait Backend: Send + Sync {
    fn model_id(&self) -> &str;

    /// Number of scores `forward` returns.
    fn output_len(&self) -> usize;

    fn forward(&self, input: &InputTensor) -> Result<Vec<f32>>;
}

/// Immutable, cheaply clonable reference to a loaded classifier and its labels.
#[derive(Clone)]
pub struct ModelHandle {
    backend: Arc<dyn Backend>,
    labels: LabelTable,
}

impl ModelHandle {
    pub fn new(backend: Arc<dyn Backend>, labels: LabelTable) -> Result<Self, LoadError> {
        if backend.output_len() != NUM_CLASSES {
            return Err(LoadError::ShapeMismatch(format!(
                "model produces {} outputs, expected {NUM_CLASSES}",
                backend.output_len()
            )));
        }
        if labels.len() != NUM_CLASSES {
            return Err(LoadError::LabelCount {
                expected: NUM_CLASSES,
                found: labels.len(),
            });
        }
        Ok(Self { backend, labels })
    }

    /// The deterministic stub classifier with the bundled ImageNet labels.
    pub fn stub() -> Self {
        Self::new(Arc::new(StubBackend::default()), LabelTable::imagenet())
            .expect("stub backend has 1000 outputs")
    }

    pub fn model_id(&self) -> &str {
        self.backend.model_id()
    }

    pub fn labels(&self) -> &LabelTable {
        &self.labels
    }

    /// Runs the network. Rejects non-finite inputs and outputs.
    pub fn infer(&self, input: &InputTensor) -> Result<LogitVector> {
        if let Some(i) = input.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "input tensor value {i} is {}",
                input.as_slice()[i]
            )));
        }
        let raw = self.backend.forward(input)?;
        if raw.len() != NUM_CLASSES {
            return Err(Error::Inference(format!(
                "backend returned {} values, expected {NUM_CLASSES}",
                raw.len()
            )));
        }
        LogitVector::from_f32(&raw).map_err(|e| Error::Inference(format!("bad model output: {e}")))
    }
}

impl std::fmt::Debug for ModelHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelHandle")
            .field("model_id", &self.model_id())
            .finish_non_exhaustive()
    }
}

/// Loads an ONNX classifier and a 1000-line label file.
pub fn load_model(path: &Path, labels_path: &Path) -> Result<ModelHandle, LoadError> {
    let labels = LabelTable::from_path(labels_path)?;
    let backend = OnnxBackend::load(path)?;
    ModelHandle::new(Arc::new(backend), labels)
}

/// Opens `"stub"` or an ONNX path. Without `labels_path` the bundled ImageNet labels are used.
pub fn open_model(model: &str, labels_path: Option<&Path>) -> Result<ModelHandle, LoadError> {
    let labels = match labels_path {
        Some(p) => LabelTable::from_path(p)?,
        None => LabelTable::imagenet(),
    };
    let backend: Arc<dyn Backend> = if model == "stub" {
        Arc::new(StubBackend::default())
    } else {
        Arc::new(OnnxBackend::load(Path::new(model))?)
    };
    ModelHandle::new(backend, labels)
}

pub fn infer(model: &ModelHandle, input: &InputTensor) -> Result<LogitVector> {
    model.infer(input)
}

type Plan = TypedSimplePlan<TypedModel>;

pub struct OnnxBackend {
    plan: Plan,
    model_id: String,
    output_len: usize,
}

impl OnnxBackend {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        if !path.is_file() {
            return Err(LoadError::MissingFile(path.to_path_buf()));
        }
        let bytes = std::fs::read(path).map_err(|e| LoadError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let backend_err = |e: TractError| LoadError::Backend {
            path: path.to_path_buf(),
            message: format!("{e:#}"),
        };

        let mut model = tract_onnx::onnx()
            .model_for_read(&mut bytes.as_slice())
            .map_err(backend_err)?;
        check_declared_input(model.input_fact(0).map_err(backend_err)?)?;

        let side = INPUT_SIZE as usize;
        model
            .set_input_fact(0, f32::fact([1, 3, side, side]).into())
            .map_err(backend_err)?;
        let typed = model.into_optimized().map_err(|e| LoadError::ShapeMismatch(format!("{e:#}")))?;
        let output_len = match typed.output_fact(0).map_err(backend_err)?.shape.as_concrete() {
            Some(dims) => dims.iter().product(),
            None => {
                return Err(LoadError::ShapeMismatch(
                    "output shape is not static for a 1x3x224x224 input".into(),
                ))
            }
        };
        if output_len != NUM_CLASSES {
            return Err(LoadError::ShapeMismatch(format!(
                "model produces {output_len} outputs, expected {NUM_CLASSES}"
            )));
        }
        let plan = typed.into_runnable().map_err(backend_err)?;

        let digest = hex::encode(Sha256::digest(&bytes));
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into());
        Ok(Self {
            plan,
            model_id: format!("onnx:{stem}:{}", &digest[..12]),
            output_len,
        })
    }
}

fn check_declared_input(fact: &InferenceFact) -> Result<(), LoadError> {
    let expected = [1i64, 3, INPUT_SIZE as i64, INPUT_SIZE as i64];
    let dims: Vec<Option<i64>> = fact
        .shape
        .dims()
        .map(|d| d.concretize().and_then(|d| d.to_i64().ok()))
        .collect();
    if dims.is_empty() {
        // rank unknown; the typed pass below will catch incompatibilities
        return Ok(());
    }
    let compatible = dims.len() == 4
        && dims
            .iter()
            .zip(expected)
            .all(|(d, e)| d.map_or(true, |d| d == e));
    if compatible {
        Ok(())
    } else {
        Err(LoadError::ShapeMismatch(format!(
            "model input is {:?}, expected 1x3x224x224",
            dims
        )))
    }
}

impl Backend for OnnxBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn output_len(&self) -> usize {
        self.output_len
    }

    fn forward(&self, input: &InputTensor) -> Result<Vec<f32>> {
        let tensor = Tensor::from_shape(&InputTensor::SHAPE, input.as_slice())
            .map_err(|e| Error::Inference(format!("{e:#}")))?;
        let outputs = self
            .plan
            .run(tvec!(tensor.into()))
            .map_err(|e| Error::Inference(format!("{e:#}")))?;
        let out = outputs[0]
            .cast_to::<f32>()
            .map_err(|e| Error::Inference(format!("{e:#}")))?;
        let values = out
            .as_slice::<f32>()
            .map_err(|e| Error::Inference(format!("{e:#}")))?;
        Ok(values.to_vec())
    }
}

/// Side of the square patches the stub averages over.
pub const STUB_PATCH: usize = 56;
const STUB_GRID: usize = INPUT_SIZE as usize / STUB_PATCH;
const STUB_FEATURES: usize = 3 * STUB_GRID * STUB_GRID;

/// Deterministic linear classifier over mean patch intensities.
///
/// The normalized input is averaged over a 4x4 grid of 56px patches per
/// channel (48 features); logits are a fixed pseudo-random affine map of
/// those features. Cheap, spatially sensitive, and identical on every
/// platform.
pub struct StubBackend {
    weights: Vec<f32>,
    bias: Vec<f32>,
    model_id: String,
}

impl StubBackend {
    pub fn with_seed(seed: u64) -> Self {
        let mut state = seed;
        let mut next = || {
            // splitmix64
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let weights = (0..NUM_CLASSES * STUB_FEATURES)
            .map(|_| next() as f32)
            .collect();
        let bias = (0..NUM_CLASSES).map(|_| (0.5 * next()) as f32).collect();
        Self {
            weights,
            bias,
            model_id: format!("stub-linear-v1:{seed}"),
        }
    }

    /// Mean of each channel over each patch, channel-major then row-major.
    pub fn features(input: &InputTensor) -> Vec<f32> {
        let mut feats = vec![0f32; STUB_FEATURES];
        let side = INPUT_SIZE as usize;
        for c in 0..3 {
            let plane = input.channel(c);
            for gy in 0..STUB_GRID {
                for gx in 0..STUB_GRID {
                    let mut sum = 0f64;
                    for y in gy * STUB_PATCH..(gy + 1) * STUB_PATCH {
                        let row = &plane[y * side + gx * STUB_PATCH..y * side + (gx + 1) * STUB_PATCH];
                        sum += row.iter().map(|&v| v as f64).sum::<f64>();
                    }
                    feats[(c * STUB_GRID + gy) * STUB_GRID + gx] =
                        (sum / (STUB_PATCH * STUB_PATCH) as f64) as f32;
                }
            }
        }
        feats
    }
}

impl Default for StubBackend {
    fn default() -> Self {
        Self::with_seed(0x5eed)
    }
}

impl Backend for StubBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn output_len(&self) -> usize {
        NUM_CLASSES
    }

    fn forward(&self, input: &InputTensor) -> Result<Vec<f32>> {
        let feats = Self::features(input);
        Ok(self
            .weights
            .chunks_exact(STUB_FEATURES)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(&feats).map(|(w, f)| w * f).sum::<f32>())
            .collect())
    }
}

/// Backend returning the same logits for every input.
pub struct FixedBackend {
    logits: Vec<f32>,
    model_id: String,
}

impl FixedBackend {
    pub fn new(logits: Vec<f32>) -> Self {
        Self {
            logits,
            model_id: "fixed".into(),
        }
    }
}

impl Backend for FixedBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn output_len(&self) -> usize {
        self.logits.len()
    }

    fn forward(&self, _input: &InputTensor) -> Result<Vec<f32>> {
        Ok(self.logits.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::INPUT_LEN;

    #[test]
    fn fixed_backend_returns_its_vector() {
        let v: Vec<f32> = (0..1000).map(|i| (i as f32 * 0.37).sin()).collect();
        let handle = ModelHandle::new(Arc::new(FixedBackend::new(v.clone())), LabelTable::imagenet()).unwrap();
        let input = InputTensor::from_raw(vec![0.25; INPUT_LEN]).unwrap();
        let logits = handle.infer(&input).unwrap();
        let expected: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        assert_eq!(logits.values(), expected.as_slice());
    }

    #[test]
    fn nan_input_is_rejected() {
        let mut data = vec![0.0; INPUT_LEN];
        data[17] = f32::NAN;
        let input = InputTensor::from_raw(data).unwrap();
        assert!(matches!(ModelHandle::stub().infer(&input), Err(Error::Numeric(_))));
    }

    #[test]
    fn wrong_output_count_is_a_shape_mismatch() {
        let err = ModelHandle::new(Arc::new(FixedBackend::new(vec![0.0; 10])), LabelTable::imagenet());
        assert!(matches!(err, Err(LoadError::ShapeMismatch(_))));
    }

    #[test]
    fn stub_is_deterministic_and_spatial() {
        let a = StubBackend::default();
        let b = StubBackend::default();
        let zero = InputTensor::from_raw(vec![0.0; INPUT_LEN]).unwrap();
        assert_eq!(a.forward(&zero).unwrap(), b.forward(&zero).unwrap());

        // brightening one corner patch changes the logits
        let mut data = vec![0.0; INPUT_LEN];
        for y in 0..STUB_PATCH {
            for x in 0..STUB_PATCH {
                data[y * 224 + x] = 1.0;
            }
        }
        let corner = InputTensor::from_raw(data).unwrap();
        assert_ne!(a.forward(&zero).unwrap(), a.forward(&corner).unwrap());
        assert_eq!(StubBackend::features(&corner)[0], 1.0);
        assert_eq!(StubBackend::features(&corner)[1], 0.0);
    }

    #[test]
    fn stub_logits_are_affine_in_features() {
        // oracle: explicit dot products against the weight table
        let stub = StubBackend::with_seed(3);
        let data: Vec<f32> = (0..INPUT_LEN).map(|i| ((i % 97) as f32 - 48.0) / 30.0).collect();
        let input = InputTensor::from_raw(data).unwrap();
        let feats = StubBackend::features(&input);
        let got = stub.forward(&input).unwrap();
        for class in [0usize, 1, 500, 999] {
            let mut acc = stub.bias[class] as f64;
            for (j, &f) in feats.iter().enumerate() {
                acc += stub.weights[class * STUB_FEATURES + j] as f64 * f as f64;
            }
            assert!((got[class] as f64 - acc).abs() < 1e-4);
        }
    }

    #[test]
    fn missing_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let labels = dir.path().join("labels.txt");
        std::fs::write(&labels, "x\n".repeat(1000)).unwrap();
        let err = load_model(&dir.path().join("nope.onnx"), &labels).unwrap_err();
        assert!(matches!(err, LoadError::MissingFile(_)));
        let err = load_model(&dir.path().join("nope.onnx"), &dir.path().join("none.txt")).unwrap_err();
        assert!(matches!(err, LoadError::MissingFile(_)));
    }
}
