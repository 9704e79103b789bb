//! Durable session storage.
//!
//! Layout under the store root:
//!
//! ```text
//! sessions/<id>/session.json    header, written once (temp file + rename)
//! sessions/<id>/records.jsonl   one InteractionRecord per line, append-only
//! masks/<hash>.png              content-addressed mask rasters
//! images/<sha256>               original image bytes
//! quarantine/                   sessions that failed to restore
//! ```
//!
//! Each record is written with a single `write` of the full line, so a crash
//! can leave at most one torn trailing line; restore drops it and truncates
//! the file back to the last complete record.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use tracing::warn;
use xai_core::Mask;

use crate::error::{Result, ServiceError};
use crate::types::{InteractionRecord, SessionHeader};

const HEADER_FILE: &str = "session.json";
const RECORDS_FILE: &str = "records.jsonl";

#[derive(Debug, Clone)]
pub struct FileStore {
    root: PathBuf,
}

/// A session read back from disk.
#[derive(Debug, Clone)]
pub struct StoredSession {
    pub header: SessionHeader,
    pub records: Vec<InteractionRecord>,
    pub image_bytes: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct RestoreReport {
    pub sessions: Vec<StoredSession>,
    /// Where each corrupt entry was moved.
    pub quarantined: Vec<PathBuf>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

fn valid_hash(hash: &str) -> bool {
    hash.len() == 64 && hash.chars().all(|c| c.is_ascii_hexdigit())
}

impl FileStore {
    /// Creates the directory layout and checks that it is writable.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let startup = |what: &str, e: std::io::Error| {
            ServiceError::Storage(format!("store {} {what}: {e}", root.display()))
        };
        for sub in ["sessions", "masks", "images", "quarantine"] {
            fs::create_dir_all(root.join(sub)).map_err(|e| startup("is not creatable", e))?;
        }
        let probe = root.join(".write-probe");
        fs::write(&probe, b"ok").map_err(|e| startup("is not writable", e))?;
        let _ = fs::remove_file(probe);
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn session_dir(&self, id: &str) -> Result<PathBuf> {
        if !valid_id(id) {
            return Err(ServiceError::NotFound(format!("session {id:?}")));
        }
        Ok(self.root.join("sessions").join(id))
    }

    pub fn mask_path(&self, hash: &str) -> PathBuf {
        self.root.join("masks").join(format!("{hash}.png"))
    }

    fn image_path(&self, sha256: &str) -> PathBuf {
        self.root.join("images").join(sha256)
    }

    /// Writes `bytes` to `path` unless it already exists; atomic via rename.
    fn write_once(path: &Path, bytes: &[u8]) -> Result<()> {
        if path.exists() {
            return Ok(());
        }
        let tmp = path.with_extension(format!("tmp-{}", uuid::Uuid::new_v4().simple()));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn put_image(&self, sha256: &str, bytes: &[u8]) -> Result<()> {
        if !valid_hash(sha256) {
            return Err(ServiceError::Storage(format!("bad image digest {sha256:?}")));
        }
        Self::write_once(&self.image_path(sha256), bytes)
    }

    /// Stores the mask under its content hash and returns the hash.
    pub fn put_mask(&self, mask: &Mask) -> Result<String> {
        let hash = mask.content_hash();
        Self::write_once(&self.mask_path(&hash), &mask.encode())?;
        Ok(hash)
    }

    pub fn mask_bytes(&self, hash: &str) -> Result<Vec<u8>> {
        if !valid_hash(hash) {
            return Err(ServiceError::NotFound(format!("mask {hash:?}")));
        }
        fs::read(self.mask_path(hash)).map_err(|e| ServiceError::NotFound(format!("mask {hash}: {e}")))
    }

    pub fn create_session(&self, header: &SessionHeader) -> Result<()> {
        let dir = self.session_dir(&header.session_id)?;
        fs::create_dir_all(&dir)?;
        let tmp = dir.join(format!("{HEADER_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_vec_pretty(header)?)?;
        fs::rename(&tmp, dir.join(HEADER_FILE))?;
        File::create(dir.join(RECORDS_FILE))?.sync_all()?;
        Ok(())
    }

    /// Appends one record as a single JSON line and syncs it to disk.
    pub fn append_record(&self, session_id: &str, record: &InteractionRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = OpenOptions::new()
            .append(true)
            .open(self.session_dir(session_id)?.join(RECORDS_FILE))?;
        file.write_all(&line)?;
        file.sync_data()?;
        Ok(())
    }

    pub fn delete_session(&self, session_id: &str) -> Result<()> {
        let dir = self.session_dir(session_id)?;
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        Ok(())
    }

    /// Loads every session. Entries that fail validation are moved to `quarantine/`.
    pub fn restore(&self) -> Result<RestoreReport> {
        let mut report = RestoreReport::default();
        let mut entries: Vec<_> = fs::read_dir(self.root.join("sessions"))?
            .collect::<std::io::Result<Vec<_>>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            match self.load_session(&path) {
                Ok(session) => report.sessions.push(session),
                Err(reason) => {
                    let name = path
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let target = self.root.join("quarantine").join(format!(
                        "{name}.{}",
                        chrono::Utc::now().format("%Y%m%dT%H%M%S%.f")
                    ));
                    warn!(path = %path.display(), %reason, "quarantining corrupt session");
                    fs::rename(&path, &target)?;
                    report.quarantined.push(target);
                }
            }
        }
        Ok(report)
    }

    fn load_session(&self, dir: &Path) -> std::result::Result<StoredSession, String> {
        if !dir.is_dir() {
            return Err("not a session directory".into());
        }
        let header_bytes = fs::read(dir.join(HEADER_FILE)).map_err(|e| format!("header: {e}"))?;
        let header: SessionHeader =
            serde_json::from_slice(&header_bytes).map_err(|e| format!("header: {e}"))?;
        if dir.file_name().and_then(|n| n.to_str()) != Some(header.session_id.as_str()) {
            return Err("header id does not match directory".into());
        }

        let records_path = dir.join(RECORDS_FILE);
        let raw = fs::read(&records_path).map_err(|e| format!("records: {e}"))?;
        let complete = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let mut records = Vec::new();
        for (n, line) in raw[..complete].split(|&b| b == b'\n').enumerate() {
            if line.is_empty() {
                continue;
            }
            let record: InteractionRecord =
                serde_json::from_slice(line).map_err(|e| format!("record line {}: {e}", n + 1))?;
            if record.iteration as usize != records.len() {
                return Err(format!(
                    "record line {} has iteration {}, expected {}",
                    n + 1,
                    record.iteration,
                    records.len()
                ));
            }
            if !self.mask_path(&record.mask_hash).is_file() {
                return Err(format!("mask {} missing", record.mask_hash));
            }
            records.push(record);
        }
        if records.is_empty() {
            return Err("no baseline record".into());
        }
        if complete < raw.len() {
            warn!(path = %records_path.display(), "dropping torn trailing record");
            OpenOptions::new()
                .write(true)
                .open(&records_path)
                .and_then(|f| f.set_len(complete as u64))
                .map_err(|e| format!("truncate torn record: {e}"))?;
        }

        let image_bytes = fs::read(self.image_path(&header.image_ref.sha256))
            .map_err(|e| format!("image {}: {e}", header.image_ref.sha256))?;
        Ok(StoredSession {
            header,
            records,
            image_bytes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unwritable_root_fails_at_open() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("a-file");
        fs::write(&file, b"x").unwrap();
        assert!(matches!(FileStore::open(file.join("store")), Err(ServiceError::Storage(_))));
    }

    #[test]
    fn masks_are_content_addressed() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        let mut mask = Mask::new(7, 5).unwrap();
        mask.set(3, 2, true);
        let hash = store.put_mask(&mask).unwrap();
        assert_eq!(hash, mask.content_hash());
        assert_eq!(store.put_mask(&mask).unwrap(), hash);
        let back = Mask::decode(&store.mask_bytes(&hash).unwrap()).unwrap();
        assert_eq!(back, mask);
        assert!(store.mask_bytes("../../etc/passwd").is_err());
    }

    #[test]
    fn stray_entries_are_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        fs::write(dir.path().join("sessions/garbage"), b"{").unwrap();
        fs::create_dir(dir.path().join("sessions/emptydir")).unwrap();
        let report = store.restore().unwrap();
        assert!(report.sessions.is_empty());
        assert_eq!(report.quarantined.len(), 2);
        assert!(fs::read_dir(dir.path().join("sessions")).unwrap().next().is_none());
    }
}
