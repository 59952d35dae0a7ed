//! Run configuration: a TOML file, overridden by flags, echoed into each
//! command's output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::provider::ProviderEndpoint;
use crate::raggen::PromptTemplate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub retrieval: Retrieval,
    pub provider: ProviderConfig,
    pub generation: Generation,
    pub metrics: Metrics,
    /// Recorded for reproducibility; no command currently samples.
    pub seed: u64,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            retrieval: Retrieval::default(),
            provider: ProviderConfig::default(),
            generation: Generation::default(),
            metrics: Metrics::default(),
            seed: 0,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub comvid: Option<PathBuf>,
    pub reviews: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    /// Where review `image_refs` resolve; defaults to the reviews file's directory.
    pub image_root: Option<PathBuf>,
    pub index: Option<PathBuf>,
    /// Where `video_ref`s resolve; defaults to the manifest's directory.
    pub video_root: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub sentiment_lexicon: Option<PathBuf>,
    pub emotion_lexicon: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            comvid: None,
            reviews: None,
            vectors: None,
            image_root: None,
            index: None,
            video_root: None,
            output_dir: PathBuf::from("out"),
            sentiment_lexicon: None,
            emotion_lexicon: None,
            synonyms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Retrieval {
    pub alpha: f64,
    pub k: usize,
    pub include_emotion: bool,
    pub dedup_by_product: bool,
    pub normalize: bool,
}

impl Default for Retrieval {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            k: crate::vindex::DEFAULT_K,
            include_emotion: true,
            dedup_by_product: false,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// No provider; provider-backed steps fail or are skipped.
    None,
    /// Deterministic in-process mocks.
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub base_url: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Name of the environment variable holding the bearer token.
    pub auth_token_env: Option<String>,
    pub max_in_flight: usize,
    pub mock_dim: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::None,
            base_url: None,
            timeout_ms: 60_000,
            max_retries: 2,
            auth_token_env: None,
            max_in_flight: 8,
            mock_dim: 64,
        }
    }
}

impl ProviderConfig {
    pub fn endpoint(&self) -> Result<ProviderEndpoint, CliError> {
        let base_url = self
            .base_url
            .clone()
            .ok_or_else(|| CliError::validation("provider.kind = \"http\" needs provider.base_url"))?;
        let ep = ProviderEndpoint {
            base_url,
            timeout_ms: self.timeout_ms,
            max_retries: self.max_retries,
            auth_token_env: self.auth_token_env.clone(),
        };
        ep.validate().map_err(CliError::validation)?;
        Ok(ep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Generation {
    pub max_tokens: u32,
    pub template: PromptTemplate,
}

impl Default for Generation {
    fn default() -> Self {
        Self {
            max_tokens: crate::raggen::DEFAULT_MAX_TOKENS,
            template: PromptTemplate::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeKind {
    Lexical,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Metrics {
    pub bertscore: bool,
    pub moverscore: bool,
    pub perplexity: bool,
    pub aspect_judge: JudgeKind,
    /// Row label in report tables.
    pub setting: String,
}

impl Default for Metrics {
    fn default() -> Self {
        Self {
            bertscore: true,
            moverscore: true,
            perplexity: true,
            aspect_judge: JudgeKind::Lexical,
            setting: "Emotion".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = super::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }

    /// Checks value ranges; file existence is checked where paths are used.
    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.retrieval;
        if !(0.0..=1.0).contains(&r.alpha) {
            return Err(CliError::validation(format!("alpha {} outside [0, 1]", r.alpha)));
        }
        if r.k == 0 {
            return Err(CliError::validation("k must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(CliError::validation("jobs must be at least 1"));
        }
        if self.provider.timeout_ms == 0 {
            return Err(CliError::validation("provider.timeout_ms must be positive"));
        }
        self.generation
            .template
            .validate()
            .map_err(|e| CliError::validation(e.to_string()))?;
        Ok(())
    }
}
