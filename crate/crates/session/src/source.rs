//! Image sources: a local corpus directory and an optional remote image API.

use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{Result, ServiceError};
use crate::types::SourceKind;

pub const REMOTE_TIMEOUT: Duration = Duration::from_secs(10);

const EXTENSIONS: [&str; 5] = ["png", "jpg", "jpeg", "webp", "bmp"];

#[derive(Debug, Clone)]
pub struct FetchedImage {
    pub kind: SourceKind,
    pub locator: String,
    pub bytes: Vec<u8>,
}

/// Directory of sample images addressed by file stem (`golden_retriever` → `golden_retriever.png`).
#[derive(Debug, Clone)]
pub struct LocalCorpus {
    dir: PathBuf,
}

impl LocalCorpus {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn valid_key(key: &str) -> bool {
        !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    }

    pub fn path_for(&self, key: &str) -> Option<PathBuf> {
        if !Self::valid_key(key) {
            return None;
        }
        EXTENSIONS
            .iter()
            .map(|ext| self.dir.join(format!("{key}.{ext}")))
            .find(|p| p.is_file())
    }

    pub fn resolve(&self, key: &str) -> Result<FetchedImage> {
        let path = self
            .path_for(key)
            .ok_or_else(|| ServiceError::NotFound(format!("no corpus image named {key:?}")))?;
        let bytes = std::fs::read(&path)?;
        Ok(FetchedImage {
            kind: SourceKind::LocalCorpus,
            locator: key.to_string(),
            bytes,
        })
    }

    /// Sorted keys of every image in the corpus directory.
    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = std::fs::read_dir(&self.dir)
            .into_iter()
            .flatten()
            .flatten()
            .filter_map(|e| {
                let path = e.path();
                let ext = path.extension()?.to_str()?.to_ascii_lowercase();
                EXTENSIONS.contains(&ext.as_str()).then_some(())?;
                let stem = path.file_stem()?.to_str()?.to_string();
                Self::valid_key(&stem).then_some(stem)
            })
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }
}

/// HTTP image API. `{selector}` in the template is replaced by the percent-encoded selector.
#[derive(Debug, Clone)]
pub struct RemoteImageApi {
    template: String,
    client: reqwest::Client,
}

impl RemoteImageApi {
    pub fn new(template: impl Into<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ServiceError::BadRequest(format!("cannot build HTTP client: {e}")))?;
        Ok(Self {
            template: template.into(),
            client,
        })
    }

    pub fn url_for(&self, selector: &str) -> String {
        self.template.replace("{selector}", &percent_encode(selector))
    }

    /// One attempt, no retries.
    pub async fn fetch(&self, selector: &str) -> Result<FetchedImage> {
        let url = self.url_for(selector);
        let upstream = |message: String| ServiceError::Upstream {
            message,
            retry: "the image API did not deliver an image; retry later or pick a local_corpus image"
                .into(),
        };
        let response = self
            .client
            .get(&url)
            .send()
            .await
            .map_err(|e| upstream(format!("GET {url}: {e}")))?;
        if !response.status().is_success() {
            return Err(upstream(format!("GET {url}: HTTP {}", response.status())));
        }
        let bytes = response
            .bytes()
            .await
            .map_err(|e| upstream(format!("GET {url}: {e}")))?;
        Ok(FetchedImage {
            kind: SourceKind::RemoteApi,
            locator: url,
            bytes: bytes.to_vec(),
        })
    }
}

fn percent_encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_lookup() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("dog.png"), b"x").unwrap();
        std::fs::write(dir.path().join("cat.jpg"), b"y").unwrap();
        std::fs::write(dir.path().join("notes.txt"), b"z").unwrap();
        let corpus = LocalCorpus::new(dir.path());
        assert_eq!(corpus.keys(), vec!["cat", "dog"]);
        assert_eq!(corpus.resolve("cat").unwrap().bytes, b"y");
        assert!(matches!(corpus.resolve("no_such_key"), Err(ServiceError::NotFound(_))));
        assert!(matches!(corpus.resolve("../dog"), Err(ServiceError::NotFound(_))));
        assert!(matches!(corpus.resolve("notes"), Err(ServiceError::NotFound(_))));
    }

    #[test]
    fn selector_is_encoded_into_template() {
        let api = RemoteImageApi::new("http://img.example/api?q={selector}", REMOTE_TIMEOUT).unwrap();
        assert_eq!(api.url_for("golden retriever/1"), "http://img.example/api?q=golden%20retriever%2F1");
    }

    #[tokio::test]
    async fn unreachable_host_is_an_upstream_error() {
        // port 9 on localhost: connection refused
        let api = RemoteImageApi::new("http://127.0.0.1:9/{selector}.png", Duration::from_secs(2)).unwrap();
        let err = api.fetch("dog").await.unwrap_err();
        assert!(matches!(err, ServiceError::Upstream { .. }), "{err}");
    }
}
