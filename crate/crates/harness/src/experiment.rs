use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xai_core::{decode_image, ClassificationResult, FillPolicy, ImageBuffer, Mask, Pipeline};

use crate::error::{HarnessError, Result};
use crate::manifest::{ExperimentManifest, ManifestEntry};
use crate::BASELINE_LABEL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub interaction: String,
    pub coverage: f64,
    pub class: String,
    pub class_index: usize,
    pub confidence: f64,
    /// Top-1 confidence minus the baseline row's top-1 confidence.
    pub delta: f64,
    /// Probability of the baseline's top-1 class in this row.
    pub baseline_class_confidence: f64,
    pub top: Vec<ClassificationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryFailure {
    pub name: String,
    pub interaction: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub model_id: String,
    pub fill: FillPolicy,
    pub preprocessing: String,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub environment: Environment,
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub failures: Vec<EntryFailure>,
}

impl ExperimentReport {
    pub fn baseline(&self, name: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.name == name && r.interaction == BASELINE_LABEL)
    }
}

fn read_image(path: &Path) -> std::result::Result<ImageBuffer, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    decode_image(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_mask(path: &Path) -> std::result::Result<Mask, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Mask::decode(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

/// Baseline plus masked interactions for one entry.
///
/// An interaction whose mask is unreadable or mis-sized becomes a failure;
/// the remaining interactions still run.
fn run_entry(
    pipeline: &Pipeline,
    entry: &ManifestEntry,
    fill: FillPolicy,
    k: usize,
) -> Result<(Vec<ReportRow>, Vec<EntryFailure>)> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let image = match read_image(&entry.image_path) {
        Ok(image) => image,
        Err(message) => {
            failures.push(EntryFailure {
                name: entry.name.clone(),
                interaction: None,
                message,
            });
            return Ok((rows, failures));
        }
    };
    let model = pipeline.model();
    let baseline = pipeline.score(&image)?.response(model, k)?;
    let base_top = baseline.top1().clone();
    rows.push(ReportRow {
        name: entry.name.clone(),
        interaction: BASELINE_LABEL.into(),
        coverage: 0.0,
        class: base_top.label.clone(),
        class_index: base_top.class_index,
        confidence: base_top.confidence,
        delta: 0.0,
        baseline_class_confidence: base_top.confidence,
        top: baseline.top,
    });

    for interaction in &entry.interactions {
        let fail = |message: String| EntryFailure {
            name: entry.name.clone(),
            interaction: Some(interaction.label.clone()),
            message,
        };
        let mask = match read_mask(&interaction.mask_path) {
            Ok(mask) => mask,
            Err(message) => {
                failures.push(fail(message));
                continue;
            }
        };
        let scored = match pipeline.score_masked(&image, &mask, fill) {
            Ok(scored) => scored,
            Err(e @ xai_core::Error::Shape { .. }) => {
                failures.push(fail(format!("{}: {e}", interaction.mask_path.display())));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let response = scored.response(model, k)?;
        let top1 = response.top1().clone();
        rows.push(ReportRow {
            name: entry.name.clone(),
            interaction: interaction.label.clone(),
            coverage: mask.coverage(),
            class: top1.label,
            class_index: top1.class_index,
            confidence: top1.confidence,
            delta: top1.confidence - base_top.confidence,
            baseline_class_confidence: scored.probs[base_top.class_index],
            top: response.top,
        });
    }
    Ok((rows, failures))
}

/// Runs every entry; rows come back in manifest order.
///
/// Any missing file aborts the run before inference starts. `fill`
/// overrides the manifest's fill policy.
pub fn run_experiment(
    pipeline: &Pipeline,
    manifest: &ExperimentManifest,
    fill: Option<FillPolicy>,
) -> Result<ExperimentReport> {
    if let Some(path) = manifest.missing_path() {
        return Err(HarnessError::asset(path, "file not found"));
    }
    manifest.validate().map_err(HarnessError::Usage)?;
    let fill = fill.unwrap_or(manifest.fill);
    let results: Vec<_> = manifest
        .entries
        .par_iter()
        .map(|entry| run_entry(pipeline, entry, fill, manifest.k))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in results {
        rows.extend(r);
        failures.extend(f);
    }
    Ok(ExperimentReport {
        environment: Environment {
            model_id: pipeline.model().model_id().to_string(),
            fill,
            preprocessing: pipeline.preprocessing().to_string(),
            k: manifest.k,
        },
        rows,
        failures,
    })
}
