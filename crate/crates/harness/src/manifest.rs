use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xai_core::FillPolicy;

use crate::error::{HarnessError, Result};

fn default_k() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub label: String,
    pub mask_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub image_path: PathBuf,
    #[serde(default)]
    pub interactions: Vec<Interaction>,
}

/// Images and their ordered mask interactions. Relative paths are resolved
/// against the manifest file's directory by [`ExperimentManifest::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub fill: FillPolicy,
    #[serde(default = "default_k")]
    pub k: usize,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::asset(path, e))?;
        let mut manifest: Self = serde_json::from_slice(&bytes)
            .map_err(|e| HarnessError::asset(path, format!("invalid manifest: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        manifest.resolve_paths(base);
        manifest.validate().map_err(|m| HarnessError::asset(path, m))?;
        Ok(manifest)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for entry in &mut self.entries {
            entry.image_path = base.join(&entry.image_path);
            for interaction in &mut entry.interactions {
                interaction.mask_path = base.join(&interaction.mask_path);
            }
        }
    }

    /// Checks label uniqueness and `k`.
    pub fn validate(&self) -> Result<(), String> {
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        for entry in &self.entries {
            let mut seen = HashSet::new();
            for interaction in &entry.interactions {
                if interaction.label == crate::BASELINE_LABEL {
                    return Err(format!("entry {:?}: {:?} is reserved", entry.name, crate::BASELINE_LABEL));
                }
                if !seen.insert(interaction.label.as_str()) {
                    return Err(format!(
                        "entry {:?}: duplicate interaction label {:?}",
                        entry.name, interaction.label
                    ));
                }
            }
        }
        Ok(())
    }

    /// First referenced file that does not exist.
    pub fn missing_path(&self) -> Option<&Path> {
        self.entries
            .iter()
            .flat_map(|e| {
                std::iter::once(e.image_path.as_path())
                    .chain(e.interactions.iter().map(|i| i.mask_path.as_path()))
            })
            .find(|p| !p.is_file())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_resolution() {
        let mut m: ExperimentManifest = serde_json::from_str(
            r#"{"entries":[{"name":"a","image_path":"img/a.png","interactions":[{"label":"x","mask_path":"m/x.png"}]}]}"#,
        )
        .unwrap();
        assert_eq!(m.k, 5);
        assert_eq!(m.fill, FillPolicy::DatasetMean);
        m.resolve_paths(Path::new("/data"));
        assert_eq!(m.entries[0].image_path, Path::new("/data/img/a.png"));
        assert_eq!(m.entries[0].interactions[0].mask_path, Path::new("/data/m/x.png"));
        assert_eq!(m.missing_path(), Some(Path::new("/data/img/a.png")));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let m: ExperimentManifest = serde_json::from_str(
            r#"{"entries":[{"name":"a","image_path":"a.png","interactions":[
                {"label":"x","mask_path":"1.png"},{"label":"x","mask_path":"2.png"}]}]}"#,
        )
        .unwrap();
        assert!(m.validate().unwrap_err().contains("duplicate"));
    }
}
