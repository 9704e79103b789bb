use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use xai_core::{ClassificationResponse, FillPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    LocalCorpus,
    RemoteApi,
}

/// Where a session's image came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRef {
    pub source: SourceKind,
    /// Corpus key or the fetched URL.
    pub locator: String,
    /// SHA-256 of the original image bytes.
    pub sha256: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordInput {
    /// Iteration 0, the unmasked image.
    Baseline,
    /// A mask composited server-side with the record's fill.
    Mask,
    /// A client-composited image; the mask is recovered by pixel difference.
    Composited,
}

/// One pass of the mask → classify → observe loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub iteration: u32,
    pub input: RecordInput,
    pub mask_hash: String,
    pub coverage: f64,
    pub fill: FillPolicy,
    pub response: ClassificationResponse,
    pub timestamp: DateTime<Utc>,
}

/// Session metadata, persisted once when the session is created.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub image_ref: ImageRef,
    pub created_at: DateTime<Utc>,
}

/// A session with its full ordered history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub image_ref: ImageRef,
    pub created_at: DateTime<Utc>,
    pub records: Vec<InteractionRecord>,
}

impl Session {
    pub fn baseline(&self) -> &InteractionRecord {
        &self.records[0]
    }
}
