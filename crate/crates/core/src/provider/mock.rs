//! Deterministic in-process providers.
//!
//! None of these sleep or read the clock, and all report zero latency, so a
//! run against them is byte-reproducible.

use std::collections::HashMap;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::protocol::{GenerateRequest, ScoreTokensResponse};
use super::{Classifier, Embedder, Embeddings, Generator, ProviderError, TokenScorer};
use crate::complaint_metrics::aspect;
use crate::text::tokenize;

/// Expands `input` into `dim` pseudo-random components in [-1, 1].
fn hash_components(domain: &[u8], input: &[u8], dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let mut block = 0u32;
    while out.len() < dim {
        let mut h = Sha256::new();
        h.update(domain);
        h.update([0u8]);
        h.update(input);
        h.update(block.to_le_bytes());
        for c in h.finalize().chunks_exact(4) {
            let x = u32::from_le_bytes(c.try_into().unwrap());
            out.push(f64::from(x) / f64::from(u32::MAX) * 2.0 - 1.0);
        }
        block += 1;
    }
    out.truncate(dim);
    out
}

fn unit(v: Vec<f64>) -> Vec<f32> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return v.into_iter().map(|x| x as f32).collect();
    }
    v.into_iter().map(|x| (x / n) as f32).collect()
}

/// Hash-based embedder producing unit vectors.
///
/// Text is embedded as the normalized sum of per-token hash vectors, so texts
/// sharing words land near each other and a single token always maps to the
/// same vector. Images are hashed as opaque bytes.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dim must be positive");
        Self { dim }
    }

    pub fn text_vector(&self, text: &str) -> Vec<f32> {
        let mut acc = vec![0.0f64; self.dim];
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return unit(hash_components(b"text", text.as_bytes(), self.dim));
        }
        for t in tokens {
            for (a, x) in acc.iter_mut().zip(hash_components(b"tok", t.as_bytes(), self.dim)) {
                *a += x;
            }
        }
        unit(acc)
    }

    pub fn image_vector(&self, bytes: &[u8]) -> Vec<f32> {
        unit(hash_components(b"img", bytes, self.dim))
    }
}

impl Embedder for HashEmbedder {
    fn embed_text(&self, texts: &[String]) -> Result<Embeddings, ProviderError> {
        Ok(Embeddings {
            vectors: texts.iter().map(|t| self.text_vector(t)).collect(),
            dim: self.dim,
        })
    }

    fn embed_image(&self, images: &[Vec<u8>]) -> Result<Embeddings, ProviderError> {
        Ok(Embeddings {
            vectors: images.iter().map(|b| self.image_vector(b)).collect(),
            dim: self.dim,
        })
    }
}

/// Embedder backed by an explicit token table; unknown inputs are an error.
#[derive(Debug, Clone, Default)]
pub struct TableEmbedder {
    pub table: HashMap<String, Vec<f32>>,
}

impl TableEmbedder {
    pub fn new(entries: impl IntoIterator<Item = (&'static str, Vec<f32>)>) -> Self {
        Self {
            table: entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

impl Embedder for TableEmbedder {
    fn embed_text(&self, texts: &[String]) -> Result<Embeddings, ProviderError> {
        let vectors = texts
            .iter()
            .map(|t| {
                self.table
                    .get(t)
                    .cloned()
                    .ok_or_else(|| ProviderError::Protocol(format!("no table entry for {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dim = vectors.first().map_or(0, Vec::len);
        Ok(Embeddings { vectors, dim })
    }

    fn embed_image(&self, _: &[Vec<u8>]) -> Result<Embeddings, ProviderError> {
        Err(ProviderError::Protocol("table embedder has no image tower".into()))
    }
}

/// Writes a fixed-register complaint derived from the prompt: the emotion
/// line, when present, and the first retrieved context.
#[derive(Debug, Clone, Default)]
pub struct TemplateGenerator;

impl Generator for TemplateGenerator {
    fn model_id(&self) -> String {
        "mock:template".into()
    }

    fn generate(&self, request: &GenerateRequest) -> Result<(String, Option<u64>), ProviderError> {
        let mut emotion = None;
        let mut context = None;
        for line in request.prompt.lines() {
            if let Some(e) = line.strip_prefix("User emotional state: ") {
                emotion = Some(e.trim().to_string());
            } else if context.is_none() && line.starts_with("1. ") {
                // "1. [id] text"
                let rest = &line[3..];
                let rest = rest.find("] ").map_or(rest, |i| &rest[i + 2..]);
                context = Some(rest.trim().to_string());
            }
        }
        let frames = request.images_b64.as_ref().map_or(0, Vec::len);
        let mut out = String::from("The user wants to convey a complaint about the product shown in the video");
        if frames > 0 {
            out.push_str(&format!(" across {frames} frames"));
        }
        out.push('.');
        if let Some(e) = emotion {
            out.push_str(&format!(" They express {e}."));
        }
        if let Some(c) = context {
            let first: Vec<&str> = c.split_whitespace().take(20).collect();
            out.push_str(&format!(" A similar customer wrote: {}", first.join(" ")));
        }
        Ok((out, Some(0)))
    }
}

/// Returns scripted results in order, repeating the last one once the script
/// runs out. Counts calls.
#[derive(Debug)]
pub struct ScriptedGenerator {
    script: Vec<Result<String, ProviderError>>,
    calls: Mutex<usize>,
}

impl ScriptedGenerator {
    pub fn new(script: Vec<Result<String, ProviderError>>) -> Self {
        assert!(!script.is_empty(), "script must not be empty");
        Self {
            script,
            calls: Mutex::new(0),
        }
    }

    pub fn always(text: &str) -> Self {
        Self::new(vec![Ok(text.to_string())])
    }

    pub fn failing(err: ProviderError) -> Self {
        Self::new(vec![Err(err)])
    }

    pub fn calls(&self) -> usize {
        *self.calls.lock().unwrap()
    }
}

impl Generator for ScriptedGenerator {
    fn model_id(&self) -> String {
        "mock:scripted".into()
    }

    fn generate(&self, _: &GenerateRequest) -> Result<(String, Option<u64>), ProviderError> {
        let mut n = self.calls.lock().unwrap();
        let out = self.script[(*n).min(self.script.len() - 1)].clone();
        *n += 1;
        out.map(|t| (t, Some(0)))
    }
}

/// Answers the aspect prompt with the lexical aspect detector.
#[derive(Debug, Clone, Default)]
pub struct KeywordClassifier;

impl Classifier for KeywordClassifier {
    fn classify(&self, prompt: &str) -> Result<String, ProviderError> {
        let (asp, text) = aspect::parse_prompt(prompt).ok_or_else(|| {
            ProviderError::Protocol("prompt is not an aspect question".into())
        })?;
        Ok(if aspect::lexical_present(&asp, &text) { "Yes" } else { "No" }.into())
    }
}

/// Returns scripted answers in order, repeating the last one.
#[derive(Debug)]
pub struct ScriptedClassifier {
    answers: Vec<Result<String, ProviderError>>,
    calls: Mutex<usize>,
}

impl ScriptedClassifier {
    pub fn new(answers: Vec<Result<String, ProviderError>>) -> Self {
        assert!(!answers.is_empty(), "script must not be empty");
        Self {
            answers,
            calls: Mutex::new(0),
        }
    }

    pub fn always(answer: &str) -> Self {
        Self::new(vec![Ok(answer.to_string())])
    }
}

impl Classifier for ScriptedClassifier {
    fn classify(&self, _: &str) -> Result<String, ProviderError> {
        let mut n = self.calls.lock().unwrap();
        let out = self.answers[(*n).min(self.answers.len() - 1)].clone();
        *n += 1;
        out
    }
}

/// Scores each word token with a hash-derived log-probability in [-5, -1].
#[derive(Debug, Clone, Default)]
pub struct HashScorer;

impl HashScorer {
    pub fn logprob(token: &str) -> f64 {
        let h = Sha256::digest(token.as_bytes());
        let x = u16::from_le_bytes([h[0], h[1]]);
        -1.0 - 4.0 * f64::from(x) / f64::from(u16::MAX)
    }
}

impl TokenScorer for HashScorer {
    fn score_tokens(&self, text: &str) -> Result<ScoreTokensResponse, ProviderError> {
        let tokens = tokenize(text);
        let logprobs = tokens.iter().map(|t| Self::logprob(t)).collect();
        Ok(ScoreTokensResponse { tokens, logprobs })
    }
}

/// Returns the same token scores for every input.
#[derive(Debug, Clone)]
pub struct ScriptedScorer(pub ScoreTokensResponse);

impl TokenScorer for ScriptedScorer {
    fn score_tokens(&self, _: &str) -> Result<ScoreTokensResponse, ProviderError> {
        Ok(self.0.clone())
    }
}
