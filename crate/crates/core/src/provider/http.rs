use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::protocol::*;
use super::{
    check_embeddings, Classifier, Embedder, Embeddings, Generator, ProviderEndpoint, ProviderError,
    TokenScorer,
};

const EXCERPT_CHARS: usize = 200;

/// Counting semaphore bounding concurrent requests through one client.
struct InFlight {
    free: Mutex<usize>,
    cv: Condvar,
}

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.cv.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a InFlight);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Blocking JSON client for the provider wire protocol.
///
/// Each call makes exactly one HTTP attempt; wrap calls in a
/// [`RetryPolicy`](super::RetryPolicy) for retries. The embedding dimension
/// seen on the first successful call is remembered and enforced afterwards.
pub struct HttpProvider {
    endpoint: ProviderEndpoint,
    client: reqwest::blocking::Client,
    token: Option<String>,
    model_id: String,
    dim: Mutex<Option<usize>>,
    in_flight: InFlight,
}

impl HttpProvider {
    pub fn new(endpoint: ProviderEndpoint) -> Result<Self, ProviderError> {
        Self::with_concurrency(endpoint, 8)
    }

    pub fn with_concurrency(
        endpoint: ProviderEndpoint,
        max_in_flight: usize,
    ) -> Result<Self, ProviderError> {
        endpoint.validate().map_err(ProviderError::Protocol)?;
        let token = match &endpoint.auth_token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                ProviderError::Unavailable(format!("auth token variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(endpoint.timeout_ms))
            .build()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        Ok(Self {
            model_id: format!("http:{}", endpoint.base_url.trim_end_matches('/')),
            endpoint,
            client,
            token,
            dim: Mutex::new(None),
            in_flight: InFlight {
                free: Mutex::new(max_in_flight.max(1)),
                cv: Condvar::new(),
            },
        })
    }

    pub fn endpoint(&self) -> &ProviderEndpoint {
        &self.endpoint
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        body: &Req,
    ) -> Result<Resp, ProviderError> {
        let url = format!("{}{}", self.endpoint.base_url.trim_end_matches('/'), path);
        let _permit = self.in_flight.acquire();
        let mut req = self.client.post(&url).json(body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| self.classify_send_error(e))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| self.classify_send_error(e))?;
        if !status.is_success() {
            let msg = serde_json::from_str::<ErrorBody>(&text)
                .map(|b| b.error)
                .unwrap_or(text);
            return Err(ProviderError::Status {
                status: status.as_u16(),
                excerpt: msg.chars().take(EXCERPT_CHARS).collect(),
            });
        }
        serde_json::from_str(&text)
            .map_err(|e| ProviderError::Protocol(format!("{path}: malformed response: {e}")))
    }

    fn classify_send_error(&self, e: reqwest::Error) -> ProviderError {
        if e.is_timeout() {
            ProviderError::Timeout(self.endpoint.timeout_ms)
        } else {
            ProviderError::Unavailable(e.to_string())
        }
    }

    fn embed<Req: Serialize>(&self, path: &str, n: usize, body: &Req) -> Result<Embeddings, ProviderError> {
        let r: EmbedResponse = self.post(path, body)?;
        let emb = Embeddings {
            vectors: r.vectors,
            dim: r.dim,
        };
        check_embeddings(n, &emb)?;
        let mut seen = self.dim.lock().unwrap_or_else(|e| e.into_inner());
        match *seen {
            Some(d) if d != emb.dim => Err(ProviderError::Protocol(format!(
                "embedding dim changed within a run: {d} then {}",
                emb.dim
            ))),
            _ => {
                *seen = Some(emb.dim);
                Ok(emb)
            }
        }
    }
}

impl Embedder for HttpProvider {
    fn embed_text(&self, texts: &[String]) -> Result<Embeddings, ProviderError> {
        self.embed(
            EMBED_TEXT,
            texts.len(),
            &EmbedTextRequest {
                texts: texts.to_vec(),
            },
        )
    }

    fn embed_image(&self, images: &[Vec<u8>]) -> Result<Embeddings, ProviderError> {
        let images_b64 = images.iter().map(|b| B64.encode(b)).collect();
        self.embed(EMBED_IMAGE, images.len(), &EmbedImageRequest { images_b64 })
    }
}

impl Generator for HttpProvider {
    fn model_id(&self) -> String {
        self.model_id.clone()
    }

    fn generate(&self, request: &GenerateRequest) -> Result<(String, Option<u64>), ProviderError> {
        let start = Instant::now();
        let r: GenerateResponse = self.post(GENERATE, request)?;
        Ok((r.text, Some(start.elapsed().as_millis() as u64)))
    }
}

impl Classifier for HttpProvider {
    fn classify(&self, prompt: &str) -> Result<String, ProviderError> {
        let r: ClassifyResponse = self.post(
            CLASSIFY,
            &ClassifyRequest {
                prompt: prompt.to_string(),
            },
        )?;
        Ok(r.answer)
    }
}

impl TokenScorer for HttpProvider {
    fn score_tokens(&self, text: &str) -> Result<ScoreTokensResponse, ProviderError> {
        let r: ScoreTokensResponse = self.post(
            SCORE_TOKENS,
            &ScoreTokensRequest {
                text: text.to_string(),
            },
        )?;
        if r.tokens.len() != r.logprobs.len() {
            return Err(ProviderError::Protocol(format!(
                "{} tokens but {} logprobs",
                r.tokens.len(),
                r.logprobs.len()
            )));
        }
        if r.logprobs.iter().any(|x| !x.is_finite()) {
            return Err(ProviderError::Protocol("non-finite logprob".into()));
        }
        Ok(r)
    }
}
