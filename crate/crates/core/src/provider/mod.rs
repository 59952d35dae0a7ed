//! External model providers: the traits the pipeline and metrics call, the
//! HTTP client speaking the wire protocol, deterministic mocks, and a
//! conformance suite for live services.

pub mod conformance;
mod http;
pub mod mock;
pub mod protocol;
pub mod server;

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpProvider;
pub use protocol::{GenerateRequest, ScoreTokensResponse};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    #[error("provider returned HTTP {status}: {excerpt}")]
    Status { status: u16, excerpt: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
}

impl ProviderError {
    /// Network-level failures are worth retrying; everything else is final.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Unavailable(_) | ProviderError::Timeout(_))
    }

    /// True when the provider could not be reached at all.
    pub fn is_unavailable(&self) -> bool {
        matches!(
            self,
            ProviderError::Unavailable(_)
                | ProviderError::Timeout(_)
                | ProviderError::RetriesExhausted { .. }
        )
    }
}

/// Vectors returned by an embedding call, one per input.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub vectors: Vec<Vec<f32>>,
    pub dim: usize,
}

pub trait Embedder: Send + Sync {
    fn embed_text(&self, texts: &[String]) -> Result<Embeddings, ProviderError>;
    fn embed_image(&self, images: &[Vec<u8>]) -> Result<Embeddings, ProviderError>;
}

pub trait Generator: Send + Sync {
    fn model_id(&self) -> String;
    /// Returns the generated text and the provider-side latency, if measured.
    fn generate(&self, request: &GenerateRequest) -> Result<(String, Option<u64>), ProviderError>;
}

/// Answers free-form prompts; used for the Yes/No aspect check.
pub trait Classifier: Send + Sync {
    fn classify(&self, prompt: &str) -> Result<String, ProviderError>;
}

/// Per-token natural-log probabilities of a text under some language model.
pub trait TokenScorer: Send + Sync {
    fn score_tokens(&self, text: &str) -> Result<ScoreTokensResponse, ProviderError>;
}

/// Connection settings for one provider service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderEndpoint {
    pub base_url: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Name of the environment variable holding a bearer token, if any.
    pub auth_token_env: Option<String>,
}

impl ProviderEndpoint {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            timeout_ms: 60_000,
            max_retries: 2,
            auth_token_env: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_ms == 0 {
            return Err("timeout_ms must be positive".into());
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(format!("base_url {:?} is not an http(s) URL", self.base_url));
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            ..RetryPolicy::default()
        }
    }
}

/// Bounded retries with exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 2,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(5),
        }
    }
}

/// A value together with the number of retries it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Retried<T> {
    pub value: T,
    pub retries: u32,
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self {
            max_retries: 0,
            ..Self::immediate(0)
        }
    }

    /// Retries without sleeping; meant for tests and in-process mocks.
    pub fn immediate(max_retries: u32) -> Self {
        Self {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    fn delay(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry.min(16)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }

    /// Runs `call` until it succeeds, fails with a non-retryable error, or
    /// `max_retries` retries have been spent.
    pub fn run<T>(
        &self,
        mut call: impl FnMut() -> Result<T, ProviderError>,
    ) -> Result<Retried<T>, ProviderError> {
        let mut retries = 0;
        loop {
            match call() {
                Ok(value) => return Ok(Retried { value, retries }),
                Err(e) if e.is_retryable() => {
                    if retries >= self.max_retries {
                        return Err(ProviderError::RetriesExhausted {
                            attempts: retries + 1,
                            last: e.to_string(),
                        });
                    }
                    log::warn!("provider call failed ({e}), retry {}", retries + 1);
                    let d = self.delay(retries);
                    if !d.is_zero() {
                        thread::sleep(d);
                    }
                    retries += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Checks an embedding response against the request size and the shared
/// invariants: one vector per input, declared dim honored, finite values.
pub fn check_embeddings(expected: usize, emb: &Embeddings) -> Result<(), ProviderError> {
    if emb.vectors.len() != expected {
        return Err(ProviderError::Protocol(format!(
            "expected {expected} vectors, got {}",
            emb.vectors.len()
        )));
    }
    if emb.dim == 0 && expected > 0 {
        return Err(ProviderError::Protocol("dim must be positive".into()));
    }
    for (i, v) in emb.vectors.iter().enumerate() {
        if v.len() != emb.dim {
            return Err(ProviderError::Protocol(format!(
                "vector {i} has {} components, declared dim {}",
                v.len(),
                emb.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ProviderError::Protocol(format!("vector {i} has non-finite values")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn succeeds_after_transient_failures() {
        let calls = Cell::new(0);
        let out = RetryPolicy::immediate(3)
            .run(|| {
                calls.set(calls.get() + 1);
                if calls.get() <= 2 {
                    Err(ProviderError::Unavailable("down".into()))
                } else {
                    Ok("X")
                }
            })
            .unwrap();
        assert_eq!(out, Retried { value: "X", retries: 2 });
    }

    #[test]
    fn bounded_attempts() {
        let calls = Cell::new(0);
        let err = RetryPolicy::immediate(1)
            .run(|| -> Result<(), _> {
                calls.set(calls.get() + 1);
                Err(ProviderError::Timeout(10))
            })
            .unwrap_err();
        assert_eq!(calls.get(), 2);
        assert!(matches!(err, ProviderError::RetriesExhausted { attempts: 2, .. }));
    }

    #[test]
    fn protocol_errors_are_not_retried() {
        let calls = Cell::new(0);
        let err = RetryPolicy::immediate(5)
            .run(|| -> Result<(), _> {
                calls.set(calls.get() + 1);
                Err(ProviderError::Status {
                    status: 400,
                    excerpt: "bad".into(),
                })
            })
            .unwrap_err();
        assert_eq!(calls.get(), 1);
        assert!(matches!(err, ProviderError::Status { status: 400, .. }));
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy {
            max_retries: 10,
            base_delay: Duration::from_millis(100),
            max_delay: Duration::from_millis(350),
        };
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(1), Duration::from_millis(200));
        assert_eq!(p.delay(2), Duration::from_millis(350));
    }

    #[test]
    fn embedding_checks() {
        let ok = Embeddings {
            vectors: vec![vec![1.0, 0.0]],
            dim: 2,
        };
        assert!(check_embeddings(1, &ok).is_ok());
        assert!(check_embeddings(2, &ok).is_err());
        let bad = Embeddings {
            vectors: vec![vec![1.0]],
            dim: 2,
        };
        assert!(check_embeddings(1, &bad).is_err());
    }

    #[test]
    fn endpoint_validation() {
        assert!(ProviderEndpoint::new("http://localhost:8080").validate().is_ok());
        assert!(ProviderEndpoint::new("localhost").validate().is_err());
        let mut e = ProviderEndpoint::new("http://x");
        e.timeout_ms = 0;
        assert!(e.validate().is_err());
    }
}
