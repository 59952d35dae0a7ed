//! Embedding-space arithmetic: review-side text/image fusion, keyframe
//! aggregation for video queries, and the blended retrieval query.
//!
//! Components are stored as `f32`; every sum is accumulated in `f64` and
//! rounded once on the way out.

pub mod cvec;
mod keyframes;

pub use keyframes::{select_keyframes, KEYFRAME_COUNT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("empty vector list")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("vector has no components")]
    ZeroDim,
    #[error("non-finite component at index {0}")]
    NonFinite(usize),
    #[error("cannot normalize the zero vector")]
    ZeroNorm,
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("expected exactly {expected} keyframe vectors, got {got}")]
    FrameCount { expected: usize, got: usize },
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
}

/// A dense embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    values: Vec<f32>,
    normalized: bool,
}

impl Vector {
    pub fn new(values: Vec<f32>) -> Result<Self, FusionError> {
        if values.is_empty() {
            return Err(FusionError::ZeroDim);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FusionError::NonFinite(i));
        }
        Ok(Self {
            values,
            normalized: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }

    fn from_f64(values: impl IntoIterator<Item = f64>) -> Result<Self, FusionError> {
        Self::new(values.into_iter().map(|v| v as f32).collect())
    }

    fn check_dim(&self, other: &Vector) -> Result<(), FusionError> {
        if self.dim() != other.dim() {
            return Err(FusionError::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f32>> for Vector {
    type Error = FusionError;

    fn try_from(values: Vec<f32>) -> Result<Self, Self::Error> {
        Vector::new(values)
    }
}

/// A fused review embedding keyed by review id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: String,
    pub vector: Vector,
}

/// The blended retrieval query together with the parts it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryEmbedding {
    pub q: Vector,
    pub alpha: f64,
    pub q_video: Vector,
    pub e_textual: Vector,
}

/// Componentwise arithmetic mean.
pub fn average_vectors(vs: &[Vector]) -> Result<Vector, FusionError> {
    let first = vs.first().ok_or(FusionError::Empty)?;
    for v in &vs[1..] {
        first.check_dim(v)?;
    }
    let n = vs.len() as f64;
    let mut acc = vec![0.0f64; first.dim()];
    for v in vs {
        for (a, &x) in acc.iter_mut().zip(v.as_slice()) {
            *a += x as f64;
        }
    }
    Vector::from_f64(acc.into_iter().map(|a| a / n))
}

/// Review-side fusion: the mean of the text embedding and the averaged image
/// embeddings. The result is not renormalized.
pub fn fuse_review(text: &Vector, images: &[Vector]) -> Result<Vector, FusionError> {
    let image_mean = average_vectors(images)?;
    text.check_dim(&image_mean)?;
    Vector::from_f64(
        text.as_slice()
            .iter()
            .zip(image_mean.as_slice())
            .map(|(&t, &i)| 0.5 * (t as f64 + i as f64)),
    )
}

/// Mean of exactly [`KEYFRAME_COUNT`] keyframe embeddings.
pub fn video_query(frames: &[Vector]) -> Result<Vector, FusionError> {
    if frames.len() != KEYFRAME_COUNT {
        return Err(FusionError::FrameCount {
            expected: KEYFRAME_COUNT,
            got: frames.len(),
        });
    }
    average_vectors(frames)
}

/// Like [`video_query`] but averages any non-empty number of frames.
pub fn video_query_permissive(frames: &[Vector]) -> Result<Vector, FusionError> {
    average_vectors(frames)
}

/// `q = alpha * q_video + (1 - alpha) * e_textual`.
pub fn blend_query(
    q_video: &Vector,
    e_textual: &Vector,
    alpha: f64,
) -> Result<QueryEmbedding, FusionError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FusionError::AlphaOutOfRange(alpha));
    }
    q_video.check_dim(e_textual)?;
    let q = Vector::from_f64(
        q_video
            .as_slice()
            .iter()
            .zip(e_textual.as_slice())
            .map(|(&v, &t)| alpha * v as f64 + (1.0 - alpha) * t as f64),
    )?;
    Ok(QueryEmbedding {
        q,
        alpha,
        q_video: q_video.clone(),
        e_textual: e_textual.clone(),
    })
}

pub fn l2_normalize(v: &Vector) -> Result<Vector, FusionError> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(FusionError::ZeroNorm);
    }
    let mut out = Vector::from_f64(v.as_slice().iter().map(|&x| x as f64 / norm))?;
    out.normalized = true;
    Ok(out)
}

pub(crate) fn squared_l2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}
