use std::path::Path;
use std::sync::Arc;

use crate::error::{LoadError, Result};

pub const NUM_CLASSES: usize = 1000;

static IMAGENET_LABELS: &str = include_str!("../data/imagenet_labels.txt");

/// Class names indexed by class id; line `i` of a label file names class `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    names: Arc<[String]>,
}

impl LabelTable {
    /// The bundled ImageNet-1k table.
    pub fn imagenet() -> Self {
        Self::parse(IMAGENET_LABELS, NUM_CLASSES).expect("bundled label table has 1000 entries")
    }

    /// Parses one name per line. A single trailing newline is allowed.
    pub fn parse(text: &str, expected: usize) -> Result<Self, LoadError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let names: Vec<String> = text
            .strip_suffix('\n')
            .unwrap_or(text)
            .split('\n')
            .map(|l| l.trim_end_matches('\r').trim().to_string())
            .collect();
        let found = if text.is_empty() { 0 } else { names.len() };
        if found != expected {
            return Err(LoadError::LabelCount { expected, found });
        }
        Ok(Self {
            names: names.into(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, LoadError> {
        if !path.exists() {
            return Err(LoadError::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text, NUM_CLASSES)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, class_index: usize) -> Option<&str> {
        self.names.get(class_index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}
