//! Replays masking experiments from a manifest and runs grid occlusion sweeps.

pub mod error;
pub mod experiment;
pub mod manifest;
pub mod report;
pub mod sweep;

pub use crate::error::{HarnessError, Result};
pub use crate::experiment::{run_experiment, EntryFailure, Environment, ExperimentReport, ReportRow};
pub use crate::manifest::{ExperimentManifest, Interaction, ManifestEntry};
pub use crate::report::{render_report, ReportFormat, COLUMNS};
pub use crate::sweep::{grid_dims, occlusion_sweep, patch_mask, OcclusionHeatmap};

/// Interaction label of each entry's unmasked row.
pub const BASELINE_LABEL: &str = "baseline";
