//! Provider-agnostic completion clients and n-sample collection.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("request failed: {0}")]
    Request(String),
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("every request failed; last error: {0}")]
    Endpoint(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One completion per call; no state carries over between calls.
pub trait LlmClient: Sync {
    fn complete(&self, prompt: &str, sample: usize) -> Result<String, ClientError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub n: usize,
    pub temperature: f64,
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    /// Requests in flight at once.
    pub concurrency: usize,
    /// Extra attempts per sample after the first failure.
    pub retries: usize,
    pub request_timeout: Duration,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            n: 25,
            temperature: 1.0,
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: "default".into(),
            api_key_env: "HEURGEN_API_KEY".into(),
            concurrency: 4,
            retries: 2,
            request_timeout: Duration::from_secs(600),
        }
    }
}

impl GenerationConfig {
    pub fn check(&self) -> Result<(), GenerationError> {
        if self.n == 0 {
            return Err(GenerationError::Config("n must be at least 1".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(GenerationError::Config(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Chat-completions endpoint: POST `{model, temperature, messages}`, read
/// `choices[0].message.content`.
pub struct HttpClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    key: Option<String>,
}

impl HttpClient {
    /// Reads the key from `cfg.api_key_env`; a missing variable sends no
    /// authorization header.
    pub fn new(cfg: &GenerationConfig) -> Result<Self, GenerationError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.request_timeout)
            .build()
            .map_err(|e| GenerationError::Config(e.to_string()))?;
        Ok(Self {
            http,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            key: std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty()),
        })
    }
}

impl LlmClient for HttpClient {
    fn complete(&self, prompt: &str, _sample: usize) -> Result<String, ClientError> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.http.post(&self.endpoint).json(&body);
        if let Some(k) = &self.key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| ClientError::Request(e.to_string()))?;
        let status = resp.status();
        if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
            return Err(ClientError::Auth(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(ClientError::Request(format!("HTTP {status}")));
        }
        let v: serde_json::Value = resp.json().map_err(|e| ClientError::Request(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| ClientError::Request("response has no choices[0].message.content".into()))
    }
}

/// Replays canned responses: sample `i` gets response `i mod len`.
pub struct MockClient {
    responses: Vec<String>,
}

impl MockClient {
    pub fn new(responses: Vec<String>) -> Self {
        assert!(!responses.is_empty(), "mock needs at least one response");
        Self { responses }
    }

    /// Every regular file in `dir`, in file-name order, or the single file
    /// `dir` itself.
    pub fn from_path(path: &Path) -> Result<Self, GenerationError> {
        let io_err = |source| GenerationError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut files = Vec::new();
        if path.is_dir() {
            for e in fs::read_dir(path).map_err(io_err)? {
                let p = e.map_err(io_err)?.path();
                if p.is_file() {
                    files.push(p);
                }
            }
            files.sort();
        } else {
            files.push(path.to_path_buf());
        }
        let mut responses = Vec::new();
        for f in files {
            responses.push(fs::read_to_string(&f).map_err(|source| GenerationError::Io { path: f, source })?);
        }
        if responses.is_empty() {
            return Err(GenerationError::Config(format!("{}: no canned responses", path.display())));
        }
        Ok(Self { responses })
    }
}

impl LlmClient for MockClient {
    fn complete(&self, _prompt: &str, sample: usize) -> Result<String, ClientError> {
        Ok(self.responses[sample % self.responses.len()].clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub sample: usize,
    /// Empty when every attempt failed.
    pub text: String,
    pub attempts: usize,
    pub error: Option<String>,
}

/// Sends `cfg.n` identical requests with up to `cfg.concurrency` in flight.
/// Failed samples are retried, then kept as empty responses. Responses are
/// returned in sample order.
pub fn request_candidates(
    client: &dyn LlmClient,
    prompt: &str,
    cfg: &GenerationConfig,
) -> Result<Vec<RawResponse>, GenerationError> {
    cfg.check()?;
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let auth: Mutex<Option<String>> = Mutex::new(None);
    let out = Mutex::new(Vec::with_capacity(cfg.n));
    thread::scope(|s| {
        for _ in 0..cfg.concurrency.clamp(1, cfg.n) {
            s.spawn(|| loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfg.n {
                    break;
                }
                let mut last = None;
                let mut attempts = 0;
                let mut text = None;
                while attempts <= cfg.retries {
                    attempts += 1;
                    match client.complete(prompt, i) {
                        Ok(t) => {
                            text = Some(t);
                            break;
                        }
                        Err(ClientError::Auth(m)) => {
                            abort.store(true, Ordering::Relaxed);
                            auth.lock().unwrap().get_or_insert(m);
                            return;
                        }
                        Err(ClientError::Request(m)) => last = Some(m),
                    }
                }
                let error = if text.is_some() { None } else { last };
                out.lock().unwrap().push(RawResponse {
                    sample: i,
                    text: text.unwrap_or_default(),
                    attempts,
                    error,
                });
            });
        }
    });
    if let Some(m) = auth.into_inner().unwrap() {
        return Err(GenerationError::Auth(m));
    }
    let mut out = out.into_inner().unwrap();
    out.sort_by_key(|r| r.sample);
    if out.iter().all(|r| r.error.is_some()) {
        let last = out.last().and_then(|r| r.error.clone()).unwrap_or_default();
        return Err(GenerationError::Endpoint(last));
    }
    Ok(out)
}
