use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, RwLock};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{CompletionRequest, CompletionResult};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no cached response for request {0}")]
    CacheMiss(String),
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned status {status}: {body}")]
    Api { status: u16, body: String },
    #[error("malformed response: {0}")]
    Response(String),
    #[error("{0}")]
    Config(String),
    #[error("cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    Record,
    Replay,
    Live,
}

impl FromStr for CacheMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "record" => Ok(CacheMode::Record),
            "replay" => Ok(CacheMode::Replay),
            "live" => Ok(CacheMode::Live),
            _ => Err(format!("unknown cache mode '{s}' (expected record, replay or live)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    hash: String,
    request: serde_json::Value,
    response: String,
}

/// Append-only response cache keyed by request hash. Readers share a lock;
/// appends are serialized.
#[derive(Debug)]
pub struct ResponseCache {
    path: PathBuf,
    entries: RwLock<HashMap<String, String>>,
    writer: Mutex<Option<File>>,
}

impl ResponseCache {
    /// Open (or lazily create) the cache at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref().to_owned();
        let cache_err = |message: String| LlmError::Cache {
            path: path.clone(),
            message,
        };
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| cache_err(e.to_string()))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| cache_err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line)
                    .map_err(|e| cache_err(format!("line {}: {e}", n + 1)))?;
                entries.insert(entry.hash, entry.response);
            }
        }
        Ok(Self {
            path,
            entries: RwLock::new(entries),
            writer: Mutex::new(None),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, hash: &str) -> Option<String> {
        self.entries.read().expect("cache lock").get(hash).cloned()
    }

    pub fn insert(&self, req: &CompletionRequest, response: &str) -> Result<(), LlmError> {
        let hash = request_hash(req);
        let entry = CacheEntry {
            hash: hash.clone(),
            request: serde_json::to_value(req).expect("requests serialize"),
            response: response.to_owned(),
        };
        let mut line = serde_json::to_string(&entry).expect("entries serialize");
        line.push('\n');
        let mut writer = self.writer.lock().expect("cache writer lock");
        if writer.is_none() {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| LlmError::Cache {
                    path: self.path.clone(),
                    message: e.to_string(),
                })?;
            *writer = Some(file);
        }
        let file = writer.as_mut().expect("writer opened above");
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| LlmError::Cache {
                path: self.path.clone(),
                message: e.to_string(),
            })?;
        self.entries.write().expect("cache lock").insert(hash, response.to_owned());
        Ok(())
    }
}

/// Hex SHA-256 of the request's wire JSON. Field order is fixed by the
/// struct, so the key does not depend on how the request was assembled.
pub fn request_hash(req: &CompletionRequest) -> String {
    let body = serde_json::to_vec(req).expect("requests serialize");
    hex::encode(Sha256::digest(&body))
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    pub mode: CacheMode,
    pub retries: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            api_key: None,
            mode: CacheMode::Replay,
            retries: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(60),
        }
    }
}

pub struct ChatClient {
    config: ClientConfig,
    cache: Option<ResponseCache>,
    http: Option<reqwest::blocking::Client>,
}

impl ChatClient {
    pub fn new(config: ClientConfig, cache: Option<ResponseCache>) -> Result<Self, LlmError> {
        let http = match config.mode {
            CacheMode::Replay => {
                if cache.is_none() {
                    return Err(LlmError::Config("replay mode requires a cache file".into()));
                }
                None
            }
            CacheMode::Record | CacheMode::Live => {
                if config.endpoint.is_none() {
                    return Err(LlmError::Config("no endpoint configured".into()));
                }
                if config.api_key.is_none() {
                    return Err(LlmError::Config("no API key configured".into()));
                }
                if config.mode == CacheMode::Record && cache.is_none() {
                    return Err(LlmError::Config("record mode requires a cache file".into()));
                }
                let client = reqwest::blocking::Client::builder()
                    .timeout(config.timeout)
                    .build()
                    .map_err(|e| LlmError::Config(e.to_string()))?;
                Some(client)
            }
        };
        Ok(Self { config, cache, http })
    }

    /// Replay-only client over an existing cache.
    pub fn replay(cache: ResponseCache) -> Self {
        Self {
            config: ClientConfig::default(),
            cache: Some(cache),
            http: None,
        }
    }

    pub fn mode(&self) -> CacheMode {
        self.config.mode
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let hash = request_hash(req);
        if let Some(cache) = &self.cache {
            if self.config.mode != CacheMode::Live {
                if let Some(text) = cache.get(&hash) {
                    return Ok(CompletionResult { text, cached: true });
                }
            }
        }
        if self.config.mode == CacheMode::Replay {
            return Err(LlmError::CacheMiss(hash));
        }
        let text = self.send(req)?;
        if self.config.mode == CacheMode::Record {
            if let Some(cache) = &self.cache {
                cache.insert(req, &text)?;
            }
        }
        Ok(CompletionResult { text, cached: false })
    }

    fn url(&self) -> String {
        let base = self.config.endpoint.as_deref().unwrap_or_default().trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_owned()
        } else {
            format!("{base}/chat/completions")
        }
    }

    fn send(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let http = self.http.as_ref().expect("http client exists outside replay mode");
        let url = self.url();
        let mut attempt = 0;
        loop {
            attempt += 1;
            let sent = http
                .post(&url)
                .bearer_auth(self.config.api_key.as_deref().unwrap_or_default())
                .json(req)
                .send();
            match sent {
                Ok(resp) => {
                    let status = resp.status();
                    let body = resp.text().map_err(|e| LlmError::Response(e.to_string()))?;
                    if !status.is_success() {
                        return Err(LlmError::Api {
                            status: status.as_u16(),
                            body,
                        });
                    }
                    return first_choice(&body);
                }
                Err(e) if attempt <= self.config.retries => {
                    let wait = self.config.backoff * 2u32.pow(attempt - 1);
                    log::warn!("request to {url} failed ({e}); retrying in {wait:?}");
                    thread::sleep(wait);
                }
                Err(e) => {
                    return Err(LlmError::Transport {
                        attempts: attempt,
                        message: e.to_string(),
                    })
                }
            }
        }
    }
}

fn first_choice(body: &str) -> Result<String, LlmError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| LlmError::Response(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_owned)
        .ok_or_else(|| LlmError::Response(format!("no choices[0].message.content in {body}")))
}
