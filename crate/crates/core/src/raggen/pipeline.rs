//! One record through retrieval and generation, with provenance.

use std::fmt;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::memory::{embed_images_batched, embed_texts_batched, to_vectors, ReviewMemory};
use super::prompt::{assemble_prompt, PromptSpec, PromptTemplate, VideoSlot};
use super::{generate, GeneratedComplaint, DEFAULT_MAX_TOKENS};
use crate::corpus::ComVidRecord;
use crate::fusion::{blend_query, cvec, l2_normalize, select_keyframes, video_query, Vector, KEYFRAME_COUNT};
use crate::provider::{Embedder, Generator, ProviderError, RetryPolicy};
use crate::vindex::{FlatIndex, SearchHit, DEFAULT_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    LoadVideo,
    Embeddings,
    KeyframeSelection,
    VideoQuery,
    BlendQuery,
    IndexQuery,
    AssemblePrompt,
    Generate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::LoadVideo => "load_video",
            Stage::Embeddings => "embeddings",
            Stage::KeyframeSelection => "keyframe_selection",
            Stage::VideoQuery => "video_query",
            Stage::BlendQuery => "blend_query",
            Stage::IndexQuery => "index_query",
            Stage::AssemblePrompt => "assemble_prompt",
            Stage::Generate => "generate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("review {review_id:?}: {stage} stage failed: {message}")]
pub struct StageError {
    pub review_id: String,
    pub stage: Stage,
    pub message: String,
    /// The provider could not be reached, as opposed to rejecting the input.
    pub unavailable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub alpha: f64,
    /// Retrieved contexts; 0 disables retrieval.
    pub k: usize,
    pub include_emotion: bool,
    pub dedup_by_product: bool,
    /// L2-normalize every provider vector before fusion.
    pub normalize: bool,
    pub template: PromptTemplate,
    pub max_tokens: u32,
    pub retry: RetryPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            k: DEFAULT_K,
            include_emotion: true,
            dedup_by_product: false,
            normalize: true,
            template: PromptTemplate::default(),
            max_tokens: DEFAULT_MAX_TOKENS,
            retry: RetryPolicy::default(),
        }
    }
}

/// Everything needed to audit a run and re-render its prompt. Fields after
/// the configuration echo are filled as stages complete, so a failed run
/// still records how far it got.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub review_id: String,
    pub alpha: f64,
    pub k: usize,
    pub include_emotion: bool,
    pub dedup_by_product: bool,
    pub normalize: bool,
    pub template_id: String,
    pub frame_count: Option<usize>,
    pub keyframes: Vec<usize>,
    pub hits: Vec<SearchHit>,
    pub prompt: Option<PromptSpec>,
    pub prompt_hash: Option<String>,
    pub model_id: Option<String>,
    pub retries: Option<u32>,
    pub latency_ms: Option<u64>,
    pub error: Option<StageFailure>,
}

/// Frames of one video.
#[derive(Debug, Clone, PartialEq)]
pub enum VideoInput {
    /// Precomputed frame embeddings, in frame order.
    Vectors(Vec<Vector>),
    /// Encoded frame images, in frame order.
    Images(Vec<Vec<u8>>),
}

impl VideoInput {
    pub fn frame_count(&self) -> usize {
        match self {
            VideoInput::Vectors(v) => v.len(),
            VideoInput::Images(v) => v.len(),
        }
    }
}

/// Resolves a `video_ref` against `root`: a `.cvec` file holds frame
/// vectors, a directory holds frame images taken in file-name order.
pub fn load_video(root: &Path, video_ref: &str) -> Result<VideoInput, String> {
    let path = root.join(video_ref);
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&path)
            .map_err(|e| format!("{}: {e}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
            .collect();
        files.sort();
        let frames = files
            .iter()
            .map(|p| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display())))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(VideoInput::Images(frames));
    }
    if path.extension().is_some_and(|e| e == "cvec") {
        let coll = cvec::read_file(&path, None).map_err(|e| format!("{}: {e}", path.display()))?;
        let frames = (0..coll.len())
            .map(|i| coll.vector(i).map_err(|e| format!("{}: row {i}: {e}", path.display())))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(VideoInput::Vectors(frames));
    }
    Err(format!("{}: not a frame directory or .cvec file", path.display()))
}

/// Retrieval plus generation over a shared index. Cheap to share across
/// threads; each run is sequential.
pub struct Pipeline<'a> {
    pub index: &'a FlatIndex,
    pub memory: &'a ReviewMemory,
    pub embedder: &'a dyn Embedder,
    pub generator: &'a dyn Generator,
    pub config: PipelineConfig,
    /// Directory `video_ref`s resolve against.
    pub video_root: PathBuf,
}

struct Fail(Stage, String, bool);

struct Retrieval {
    video: VideoInput,
    keyframes: Vec<usize>,
    hits: Vec<SearchHit>,
}

fn provider_fail(stage: Stage) -> impl Fn(ProviderError) -> Fail {
    move |e| Fail(stage, e.to_string(), e.is_unavailable())
}

fn fail<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> Fail {
    move |e| Fail(stage, e.to_string(), false)
}

impl Pipeline<'_> {
    pub fn run(&self, record: &ComVidRecord) -> (Provenance, Result<GeneratedComplaint, StageError>) {
        let c = &self.config;
        let mut prov = Provenance {
            review_id: record.review_id.clone(),
            alpha: c.alpha,
            k: c.k,
            include_emotion: c.include_emotion,
            dedup_by_product: c.dedup_by_product,
            normalize: c.normalize,
            template_id: c.template.id.clone(),
            frame_count: None,
            keyframes: Vec::new(),
            hits: Vec::new(),
            prompt: None,
            prompt_hash: None,
            model_id: None,
            retries: None,
            latency_ms: None,
            error: None,
        };
        let result = self.stages(record, &mut prov).map_err(|Fail(stage, message, unavailable)| {
            prov.error = Some(StageFailure {
                stage,
                message: message.clone(),
            });
            StageError {
                review_id: record.review_id.clone(),
                stage,
                message,
                unavailable,
            }
        });
        (prov, result)
    }

    /// Hits for a record without generating; the `retrieve` path.
    pub fn retrieve(&self, record: &ComVidRecord) -> Result<Vec<SearchHit>, StageError> {
        let r = self.query(record).map_err(|Fail(stage, message, unavailable)| StageError {
            review_id: record.review_id.clone(),
            stage,
            message,
            unavailable,
        })?;
        Ok(r.hits)
    }

    fn query(&self, record: &ComVidRecord) -> Result<Retrieval, Fail> {
        let c = &self.config;
        let video = load_video(&self.video_root, &record.video_ref).map_err(fail(Stage::LoadVideo))?;

        let frames = match &video {
            VideoInput::Vectors(v) => {
                if c.normalize {
                    v.iter()
                        .map(l2_normalize)
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(fail(Stage::Embeddings))?
                } else {
                    v.clone()
                }
            }
            VideoInput::Images(imgs) => {
                let raw = embed_images_batched(imgs, self.embedder, c.retry).map_err(provider_fail(Stage::Embeddings))?;
                to_vectors(raw, c.normalize).map_err(fail(Stage::Embeddings))?
            }
        };
        let aspects = vec![record.aspects.join(", ")];
        let raw = embed_texts_batched(&aspects, self.embedder, c.retry).map_err(provider_fail(Stage::Embeddings))?;
        let e_textual = to_vectors(raw, c.normalize).map_err(fail(Stage::Embeddings))?.remove(0);

        let keyframes = select_keyframes(&frames, KEYFRAME_COUNT).map_err(fail(Stage::KeyframeSelection))?;
        let picked: Vec<Vector> = keyframes.iter().map(|&i| frames[i].clone()).collect();
        let q_video = video_query(&picked).map_err(fail(Stage::VideoQuery))?;
        let q = blend_query(&q_video, &e_textual, c.alpha).map_err(fail(Stage::BlendQuery))?;
        let hits = if c.k == 0 {
            Vec::new()
        } else {
            self.index.query(&q.q, c.k).map_err(fail(Stage::IndexQuery))?
        };
        Ok(Retrieval { video, keyframes, hits })
    }

    fn stages(&self, record: &ComVidRecord, prov: &mut Provenance) -> Result<GeneratedComplaint, Fail> {
        let c = &self.config;
        let Retrieval { video, keyframes, hits } = self.query(record)?;
        prov.frame_count = Some(video.frame_count());
        prov.keyframes = keyframes.clone();
        prov.hits = hits.clone();

        let contexts = hits
            .iter()
            .map(|h| {
                self.memory
                    .context(&h.id)
                    .ok_or_else(|| Fail(Stage::AssemblePrompt, format!("hit {:?} has no review text", h.id), false))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (slot, images) = match &video {
            VideoInput::Vectors(_) => (VideoSlot::KeyframeVectors { indices: keyframes }, None),
            VideoInput::Images(imgs) => {
                let b64 = keyframes
                    .iter()
                    .map(|&i| base64::engine::general_purpose::STANDARD.encode(&imgs[i]))
                    .collect();
                (VideoSlot::KeyframeImages { indices: keyframes }, Some(b64))
            }
        };
        let prompt = assemble_prompt(
            record.emotion,
            &record.product_name,
            record.domain,
            &contexts,
            &c.template,
            c.include_emotion,
            c.dedup_by_product,
            slot,
        )
        .map_err(fail(Stage::AssemblePrompt))?;
        prov.prompt = Some(prompt.spec.clone());
        prov.prompt_hash = Some(prompt.hash.clone());

        let g = generate(&record.review_id, &prompt, images, self.generator, c.retry, c.max_tokens)
            .map_err(provider_fail(Stage::Generate))?;
        prov.model_id = Some(g.complaint.model_id.clone());
        prov.retries = Some(g.retries);
        prov.latency_ms = Some(g.complaint.latency_ms);
        Ok(g.complaint)
    }
}

/// Runs every record on up to `jobs` threads; results keep input order.
#[allow(clippy::type_complexity)]
pub fn run_all(
    pipeline: &Pipeline<'_>,
    records: &[ComVidRecord],
    jobs: usize,
) -> Vec<(Provenance, Result<GeneratedComplaint, StageError>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| records.par_iter().map(|r| pipeline.run(r)).collect()),
        Err(_) => records.iter().map(|r| pipeline.run(r)).collect(),
    }
}
