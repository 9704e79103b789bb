//! Session service: image selection, baseline classification, and the
//! mask → classify → observe loop over HTTP.

pub mod error;
pub mod http;
pub mod service;
pub mod source;
pub mod store;
pub mod types;

pub use crate::error::{Result, ServiceError};
pub use crate::http::router;
pub use crate::service::{ServiceOptions, SessionService, DEFAULT_K};
pub use crate::source::{FetchedImage, LocalCorpus, RemoteImageApi};
pub use crate::store::{FileStore, RestoreReport, StoredSession};
pub use crate::types::{ImageRef, InteractionRecord, RecordInput, Session, SessionHeader, SourceKind};
