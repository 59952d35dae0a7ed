//! The retrieval memory: fused review embeddings plus the texts needed to
//! resolve index hits back into prompt contexts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::prompt::Context;
use crate::corpus::AmazonReview;
use crate::fusion::{fuse_review, l2_normalize, EmbeddingRecord, FusionError, Vector};
use crate::provider::{check_embeddings, Embedder, ProviderError, RetryPolicy};

/// Items per embedding request.
const BATCH: usize = 32;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("review {id:?}: {source}")]
    Fusion {
        id: String,
        #[source]
        source: FusionError,
    },
}

/// Review texts by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReviewMemory {
    entries: BTreeMap<String, (String, Option<String>)>,
}

impl ReviewMemory {
    pub fn from_reviews(reviews: &[AmazonReview]) -> Self {
        Self {
            entries: reviews
                .iter()
                .map(|r| (r.review_id.clone(), (r.text(), r.product_id.clone())))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn context(&self, id: &str) -> Option<Context> {
        self.entries.get(id).map(|(text, product)| Context {
            id: id.to_string(),
            text: text.clone(),
            product_id: product.clone(),
        })
    }
}

pub(crate) fn to_vectors(raw: Vec<Vec<f32>>, normalize: bool) -> Result<Vec<Vector>, FusionError> {
    raw.into_iter()
        .map(|v| {
            let v = Vector::new(v)?;
            if normalize {
                l2_normalize(&v)
            } else {
                Ok(v)
            }
        })
        .collect()
}

pub(crate) fn embed_texts_batched(
    texts: &[String],
    embedder: &dyn Embedder,
    retry: RetryPolicy,
) -> Result<Vec<Vec<f32>>, ProviderError> {
    let mut out = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(BATCH) {
        let emb = retry.run(|| embedder.embed_text(chunk))?.value;
        check_embeddings(chunk.len(), &emb)?;
        out.extend(emb.vectors);
    }
    Ok(out)
}

pub(crate) fn embed_images_batched(
    images: &[Vec<u8>],
    embedder: &dyn Embedder,
    retry: RetryPolicy,
) -> Result<Vec<Vec<f32>>, ProviderError> {
    let mut out = Vec::with_capacity(images.len());
    for chunk in images.chunks(BATCH) {
        let emb = retry.run(|| embedder.embed_image(chunk))?.value;
        check_embeddings(chunk.len(), &emb)?;
        out.extend(emb.vectors);
    }
    Ok(out)
}

/// Embeds every review as the mean of its text vector and its averaged image
/// vectors. Image refs resolve against `image_root`. A review without images
/// is represented by its text vector alone.
pub fn embed_reviews(
    reviews: &[AmazonReview],
    image_root: &Path,
    embedder: &dyn Embedder,
    retry: RetryPolicy,
    normalize: bool,
) -> Result<Vec<EmbeddingRecord>, MemoryError> {
    let texts: Vec<String> = reviews.iter().map(AmazonReview::text).collect();
    let mut images = Vec::new();
    for r in reviews {
        for rel in &r.image_refs {
            let path = image_root.join(rel);
            let bytes = std::fs::read(&path).map_err(|source| MemoryError::Io { path, source })?;
            images.push(bytes);
        }
    }
    let fusion_err = |id: &str| {
        let id = id.to_string();
        move |source| MemoryError::Fusion { id, source }
    };
    let text_vecs = embed_texts_batched(&texts, embedder, retry)?;
    let image_vecs = embed_images_batched(&images, embedder, retry)?;
    let mut image_iter = image_vecs.into_iter();
    let mut records = Vec::with_capacity(reviews.len());
    for (r, t) in reviews.iter().zip(text_vecs) {
        let t = to_vectors(vec![t], normalize).map_err(fusion_err(&r.review_id))?.remove(0);
        let imgs: Vec<Vec<f32>> = image_iter.by_ref().take(r.image_refs.len()).collect();
        let imgs = to_vectors(imgs, normalize).map_err(fusion_err(&r.review_id))?;
        let vector = if imgs.is_empty() {
            t
        } else {
            fuse_review(&t, &imgs).map_err(fusion_err(&r.review_id))?
        };
        records.push(EmbeddingRecord {
            id: r.review_id.clone(),
            vector,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::mock::HashEmbedder;

    fn review(id: &str, body: &str, images: &[&str]) -> AmazonReview {
        AmazonReview {
            review_id: id.into(),
            rating: 1,
            title: String::new(),
            body: body.into(),
            image_refs: images.iter().map(|s| s.to_string()).collect(),
            product_id: None,
        }
    }

    #[test]
    fn fused_vectors_match_manual_fusion() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.ppm"), b"P6 1 1 255 abc").unwrap();
        std::fs::write(dir.path().join("b.ppm"), b"P6 1 1 255 xyz").unwrap();
        let reviews = [review("r1", "broken handle", &["a.ppm", "b.ppm"]), review("r2", "late", &[])];
        let emb = HashEmbedder::new(8);
        let recs = embed_reviews(&reviews, dir.path(), &emb, RetryPolicy::none(), true).unwrap();
        assert_eq!(recs.len(), 2);
        let t = Vector::new(emb.text_vector("broken handle")).unwrap();
        let a = Vector::new(emb.image_vector(b"P6 1 1 255 abc")).unwrap();
        let b = Vector::new(emb.image_vector(b"P6 1 1 255 xyz")).unwrap();
        let expect = fuse_review(&l2_normalize(&t).unwrap(), &[l2_normalize(&a).unwrap(), l2_normalize(&b).unwrap()]).unwrap();
        assert_eq!(recs[0].vector.as_slice(), expect.as_slice());
        let t2 = l2_normalize(&Vector::new(emb.text_vector("late")).unwrap()).unwrap();
        assert_eq!(recs[1].vector.as_slice(), t2.as_slice());
    }

    #[test]
    fn missing_image_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = embed_reviews(&[review("r1", "x", &["nope.ppm"])], dir.path(), &HashEmbedder::new(4), RetryPolicy::none(), true)
            .unwrap_err();
        assert!(err.to_string().contains("nope.ppm"));
    }

    #[test]
    fn memory_resolves_contexts() {
        let mut r = review("r1", "body", &[]);
        r.title = "Title".into();
        r.product_id = Some("p".into());
        let m = ReviewMemory::from_reviews(&[r]);
        let c = m.context("r1").unwrap();
        assert_eq!((c.text.as_str(), c.product_id.as_deref()), ("Title body", Some("p")));
        assert!(m.context("r2").is_none());
    }
}
