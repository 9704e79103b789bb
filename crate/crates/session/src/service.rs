//! Stateful sessions: one image, a baseline classification, and an
//! append-only list of masked re-classifications.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use chrono::Utc;
use parking_lot::{Mutex, RwLock};
use sha2::{Digest, Sha256};
use tracing::{info, warn};
use xai_core::{decode_image, FillPolicy, ImageBuffer, Mask, Pipeline};

use crate::error::{Result, ServiceError};
use crate::source::{FetchedImage, LocalCorpus, RemoteImageApi, REMOTE_TIMEOUT};
use crate::store::FileStore;
use crate::types::{
    ImageRef, InteractionRecord, RecordInput, Session, SessionHeader, SourceKind,
};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    pub corpus_dir: Option<PathBuf>,
    /// URL template for the remote image API, with a `{selector}` placeholder.
    pub image_api: Option<String>,
    pub image_api_timeout: Option<Duration>,
    pub store_dir: Option<PathBuf>,
    pub ttl: Option<Duration>,
    pub default_k: Option<usize>,
}

struct SessionSlot {
    header: SessionHeader,
    image: ImageBuffer,
    image_bytes: Arc<Vec<u8>>,
    records: Mutex<Vec<InteractionRecord>>,
}

impl SessionSlot {
    fn snapshot(&self) -> Session {
        Session {
            session_id: self.header.session_id.clone(),
            image_ref: self.header.image_ref.clone(),
            created_at: self.header.created_at,
            records: self.records.lock().clone(),
        }
    }
}

pub struct SessionService {
    pipeline: Pipeline,
    corpus: Option<LocalCorpus>,
    remote: Option<RemoteImageApi>,
    store: Option<FileStore>,
    ttl: Option<chrono::Duration>,
    default_k: usize,
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
}

impl SessionService {
    /// Opens the store (if any) and restores its sessions.
    pub fn new(pipeline: Pipeline, options: ServiceOptions) -> Result<Self> {
        let remote = options
            .image_api
            .map(|t| RemoteImageApi::new(t, options.image_api_timeout.unwrap_or(REMOTE_TIMEOUT)))
            .transpose()?;
        let store = options.store_dir.map(FileStore::open).transpose()?;
        let ttl = options
            .ttl
            .map(|d| chrono::Duration::from_std(d).unwrap_or(chrono::Duration::MAX));
        let service = Self {
            pipeline,
            corpus: options.corpus_dir.map(LocalCorpus::new),
            remote,
            store,
            ttl,
            default_k: options.default_k.unwrap_or(DEFAULT_K),
            sessions: RwLock::new(HashMap::new()),
        };
        service.restore()?;
        Ok(service)
    }

    fn restore(&self) -> Result<()> {
        let Some(store) = &self.store else {
            return Ok(());
        };
        let report = store.restore()?;
        for path in &report.quarantined {
            warn!(path = %path.display(), "corrupt session moved aside");
        }
        let mut sessions = self.sessions.write();
        for stored in report.sessions {
            let image = match decode_image(&stored.image_bytes) {
                Ok(img) => img,
                Err(e) => {
                    warn!(session = %stored.header.session_id, error = %e, "stored image unreadable; skipping");
                    continue;
                }
            };
            let id = stored.header.session_id.clone();
            sessions.insert(
                id,
                Arc::new(SessionSlot {
                    header: stored.header,
                    image,
                    image_bytes: Arc::new(stored.image_bytes),
                    records: Mutex::new(stored.records),
                }),
            );
        }
        info!(sessions = sessions.len(), quarantined = report.quarantined.len(), "store restored");
        Ok(())
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn store(&self) -> Option<&FileStore> {
        self.store.as_ref()
    }

    pub fn default_k(&self) -> usize {
        self.default_k
    }

    pub fn corpus_keys(&self) -> Vec<String> {
        self.corpus.as_ref().map(LocalCorpus::keys).unwrap_or_default()
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Resolves a selector against the chosen source. Only the remote path awaits.
    pub async fn fetch(&self, source: SourceKind, selector: &str) -> Result<FetchedImage> {
        match source {
            SourceKind::LocalCorpus => self
                .corpus
                .as_ref()
                .ok_or_else(|| ServiceError::NotFound("no local corpus configured".into()))?
                .resolve(selector),
            SourceKind::RemoteApi => {
                self.remote
                    .as_ref()
                    .ok_or_else(|| ServiceError::NotFound("no remote image API configured".into()))?
                    .fetch(selector)
                    .await
            }
        }
    }

    pub async fn create_session(
        &self,
        source: SourceKind,
        selector: &str,
        k: Option<usize>,
    ) -> Result<Session> {
        let fetched = self.fetch(source, selector).await?;
        self.create_from_fetched(fetched, k)
    }

    /// Decodes the image, classifies it unmasked as record 0, and persists the session.
    pub fn create_from_fetched(&self, fetched: FetchedImage, k: Option<usize>) -> Result<Session> {
        let image = decode_image(&fetched.bytes)?;
        let k = k.unwrap_or(self.default_k);
        let response = self.pipeline.classify(&image, k)?;
        let empty = Mask::new(image.width(), image.height())?;

        let header = SessionHeader {
            session_id: uuid::Uuid::new_v4().to_string(),
            image_ref: ImageRef {
                source: fetched.kind,
                locator: fetched.locator,
                sha256: hex::encode(Sha256::digest(&fetched.bytes)),
                width: image.width(),
                height: image.height(),
            },
            created_at: Utc::now(),
        };
        let baseline = InteractionRecord {
            iteration: 0,
            input: RecordInput::Baseline,
            mask_hash: empty.content_hash(),
            coverage: 0.0,
            fill: FillPolicy::default(),
            response,
            timestamp: header.created_at,
        };
        if let Some(store) = &self.store {
            store.put_image(&header.image_ref.sha256, &fetched.bytes)?;
            store.put_mask(&empty)?;
            store.create_session(&header)?;
            store.append_record(&header.session_id, &baseline)?;
        }
        let slot = Arc::new(SessionSlot {
            header,
            image,
            image_bytes: Arc::new(fetched.bytes),
            records: Mutex::new(vec![baseline]),
        });
        let session = slot.snapshot();
        self.sessions
            .write()
            .insert(session.session_id.clone(), slot);
        Ok(session)
    }

    fn slot(&self, session_id: &str) -> Result<Arc<SessionSlot>> {
        let slot = self
            .sessions
            .read()
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("session {session_id}")))?;
        if let Some(ttl) = self.ttl {
            if Utc::now() - slot.header.created_at > ttl {
                self.sessions.write().remove(session_id);
                if let Some(store) = &self.store {
                    store.delete_session(session_id)?;
                }
                return Err(ServiceError::NotFound(format!("session {session_id} expired")));
            }
        }
        Ok(slot)
    }

    /// Appends a record with the next iteration index, persisting it first.
    fn append(
        &self,
        slot: &SessionSlot,
        input: RecordInput,
        mask: &Mask,
        fill: FillPolicy,
        response: xai_core::ClassificationResponse,
    ) -> Result<InteractionRecord> {
        let mask_hash = match &self.store {
            Some(store) => store.put_mask(mask)?,
            None => mask.content_hash(),
        };
        let mut records = slot.records.lock();
        let record = InteractionRecord {
            iteration: records.len() as u32,
            input,
            mask_hash,
            coverage: mask.coverage(),
            fill,
            response,
            timestamp: Utc::now(),
        };
        if let Some(store) = &self.store {
            store.append_record(&slot.header.session_id, &record)?;
        }
        records.push(record.clone());
        Ok(record)
    }

    /// Decodes a transport mask and classifies the session image with it applied.
    pub fn classify_masked(
        &self,
        session_id: &str,
        mask_bytes: &[u8],
        fill: FillPolicy,
        k: Option<usize>,
    ) -> Result<InteractionRecord> {
        let mask = Mask::decode(mask_bytes)?;
        self.classify_mask(session_id, &mask, fill, k)
    }

    pub fn classify_mask(
        &self,
        session_id: &str,
        mask: &Mask,
        fill: FillPolicy,
        k: Option<usize>,
    ) -> Result<InteractionRecord> {
        let slot = self.slot(session_id)?;
        let k = k.unwrap_or(self.default_k);
        let response = self.pipeline.classify_masked(&slot.image, mask, fill, k)?;
        self.append(&slot, RecordInput::Mask, mask, fill, response)
    }

    /// Classifies a client-composited image as-is.
    ///
    /// The recorded mask is every pixel that differs from the session image;
    /// `fill` is whatever the client reports having used.
    pub fn classify_composited(
        &self,
        session_id: &str,
        image_bytes: &[u8],
        fill: FillPolicy,
        k: Option<usize>,
    ) -> Result<InteractionRecord> {
        let slot = self.slot(session_id)?;
        let uploaded = decode_image(image_bytes)?;
        if uploaded.dimensions() != slot.image.dimensions() {
            return Err(ServiceError::Shape(format!(
                "image is {}x{}, session image is {}x{}",
                uploaded.width(),
                uploaded.height(),
                slot.image.width(),
                slot.image.height()
            )));
        }
        let mask = Mask::from_fn(uploaded.width(), uploaded.height(), |x, y| {
            uploaded.pixel(x, y) != slot.image.pixel(x, y)
        })?;
        let k = k.unwrap_or(self.default_k);
        let response = self.pipeline.classify(&uploaded, k)?;
        self.append(&slot, RecordInput::Composited, &mask, fill, response)
    }

    pub fn get_history(&self, session_id: &str) -> Result<Session> {
        Ok(self.slot(session_id)?.snapshot())
    }

    /// Original image bytes as uploaded or fetched.
    pub fn image_bytes(&self, session_id: &str) -> Result<Arc<Vec<u8>>> {
        Ok(self.slot(session_id)?.image_bytes.clone())
    }

    pub fn delete_session(&self, session_id: &str) -> Result<()> {
        if self.sessions.write().remove(session_id).is_none() {
            return Err(ServiceError::NotFound(format!("session {session_id}")));
        }
        if let Some(store) = &self.store {
            store.delete_session(session_id)?;
        }
        Ok(())
    }
}
