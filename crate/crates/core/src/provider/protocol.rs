//! JSON bodies of the provider wire protocol.
//!
//! | endpoint               | request                                   | response                              |
//! |------------------------|-------------------------------------------|---------------------------------------|
//! | `POST /v1/embed_text`   | `{"texts":[string]}`                      | `{"vectors":[[number]],"dim":int}`    |
//! | `POST /v1/embed_image`  | `{"images_b64":[string]}`                 | `{"vectors":[[number]],"dim":int}`    |
//! | `POST /v1/generate`     | `{"prompt":string,"images_b64":[string]?,"max_tokens":int}` | `{"text":string}` |
//! | `POST /v1/classify`     | `{"prompt":string}`                       | `{"answer":string}`                   |
//! | `POST /v1/score_tokens` | `{"text":string}`                         | `{"tokens":[string],"logprobs":[number]}` |
//!
//! Failures use a non-2xx status with `{"error":string}`. The full contract,
//! including retry and validation rules, is `docs/protocol.md`.

use serde::{Deserialize, Serialize};

pub const EMBED_TEXT: &str = "/v1/embed_text";
pub const EMBED_IMAGE: &str = "/v1/embed_image";
pub const GENERATE: &str = "/v1/generate";
pub const CLASSIFY: &str = "/v1/classify";
pub const SCORE_TOKENS: &str = "/v1/score_tokens";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedTextRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedImageRequest {
    pub images_b64: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f32>>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images_b64: Option<Vec<String>>,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTokensRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTokensResponse {
    pub tokens: Vec<String>,
    pub logprobs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
