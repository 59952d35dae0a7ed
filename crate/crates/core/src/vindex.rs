//! Exact flat L2 nearest-neighbor index over fused review embeddings.
//!
//! Rows are stored as `f32`, distances are accumulated in `f64` and reported
//! as squared L2. Hits are ordered by `(distance, id)`, so results are fully
//! deterministic even with exact ties.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::cvec::{self, FormatError, VectorCollection};
use crate::fusion::{squared_l2, EmbeddingRecord, Vector};

/// Format tag written after the CVEC1 magic in index files.
pub const INDEX_TAG: [u8; 8] = *b"FIDX1\0\0\0";
/// Neighbors retrieved when nothing else is configured.
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cannot build an index from zero records")]
    Empty,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("dimension mismatch for {id:?}: expected {expected}, got {got}")]
    DimMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("query dimension {got} does not match index dimension {expected}")]
    QueryDim { expected: usize, got: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("non-finite value in row {0:?}")]
    NonFinite(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub id: String,
    /// Squared L2 distance.
    pub distance: f64,
    pub rank: usize,
}

/// Immutable exhaustive-scan index. Safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatIndex {
    rows: VectorCollection,
}

impl FlatIndex {
    /// Builds an index holding exactly the given rows, in input order.
    pub fn build(records: &[EmbeddingRecord]) -> Result<Self, IndexError> {
        let first = records.first().ok_or(IndexError::Empty)?;
        let dim = first.vector.dim();
        let mut rows = VectorCollection::new(dim);
        let mut seen = HashSet::with_capacity(records.len());
        rows.data.reserve(records.len() * dim);
        for rec in records {
            if !seen.insert(rec.id.as_str()) {
                return Err(IndexError::DuplicateId(rec.id.clone()));
            }
            if rec.vector.dim() != dim {
                return Err(IndexError::DimMismatch {
                    id: rec.id.clone(),
                    expected: dim,
                    got: rec.vector.dim(),
                });
            }
            rows.ids.push(rec.id.clone());
            rows.data.extend_from_slice(rec.vector.as_slice());
        }
        Ok(Self { rows })
    }

    /// Builds from a decoded collection, re-checking all invariants.
    pub fn from_collection(rows: VectorCollection) -> Result<Self, IndexError> {
        if rows.is_empty() {
            return Err(IndexError::Empty);
        }
        let mut seen = HashSet::with_capacity(rows.len());
        for (i, id) in rows.ids.iter().enumerate() {
            if !seen.insert(id.as_str()) {
                return Err(IndexError::DuplicateId(id.clone()));
            }
            if rows.row(i).iter().any(|v| !v.is_finite()) {
                return Err(IndexError::NonFinite(id.clone()));
            }
        }
        Ok(Self { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.rows.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        self.rows.row(i)
    }

    pub fn collection(&self) -> &VectorCollection {
        &self.rows
    }

    /// The `min(k, len)` rows nearest to `q`, exact.
    pub fn query(&self, q: &Vector, k: usize) -> Result<Vec<SearchHit>, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        if q.dim() != self.dim() {
            return Err(IndexError::QueryDim {
                expected: self.dim(),
                got: q.dim(),
            });
        }
        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .map(|i| (squared_l2(q.as_slice(), self.row(i)), i))
            .collect();
        let ids = &self.rows.ids;
        let order = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| ids[a.1].cmp(&ids[b.1]))
        };
        let k = k.min(scored.len());
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_by(order);
        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(rank, (distance, i))| SearchHit {
                id: ids[i].clone(),
                distance,
                rank,
            })
            .collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        cvec::encode(&self.rows, Some(INDEX_TAG))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        Self::from_collection(cvec::decode(bytes, Some(INDEX_TAG))?)
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        cvec::write_file(path, &self.rows, Some(INDEX_TAG)).map_err(FormatError::from)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        Self::from_collection(cvec::read_file(path, Some(INDEX_TAG))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: &str, xs: &[f32]) -> EmbeddingRecord {
        EmbeddingRecord {
            id: id.into(),
            vector: Vector::new(xs.to_vec()).unwrap(),
        }
    }

    fn small() -> FlatIndex {
        FlatIndex::build(&[
            rec("r3", &[0.0, 0.0, 1.0, 0.0]),
            rec("r1", &[1.0, 0.0, 0.0, 0.0]),
            rec("r2", &[0.0, 1.0, 0.0, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn build_keeps_input_order() {
        let idx = small();
        assert_eq!(idx.len(), 3);
        assert_eq!(idx.ids(), ["r3", "r1", "r2"]);
    }

    #[test]
    fn build_errors() {
        let err = FlatIndex::build(&[rec("r1", &[1.0]), rec("r1", &[2.0])]).unwrap_err();
        assert!(err.to_string().contains("\"r1\""));
        assert!(matches!(
            FlatIndex::build(&[rec("a", &[1.0]), rec("b", &[1.0, 2.0])]),
            Err(IndexError::DimMismatch { .. })
        ));
        assert!(matches!(FlatIndex::build(&[]), Err(IndexError::Empty)));
    }

    #[test]
    fn self_match_is_rank_zero() {
        let idx = small();
        let q = Vector::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let hits = idx.query(&q, 1).unwrap();
        assert_eq!(hits[0].id, "r2");
        assert_eq!(hits[0].distance, 0.0);
        assert_eq!(hits[0].rank, 0);
    }

    #[test]
    fn saturates_and_breaks_ties_by_id() {
        let idx = small();
        let q = Vector::new(vec![0.0; 4]).unwrap();
        let hits = idx.query(&q, 10).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.id.as_str()).collect();
        assert_eq!(ids, ["r1", "r2", "r3"]);
        assert!(hits.iter().all(|h| h.distance == 1.0));
    }

    #[test]
    fn query_errors() {
        let idx = small();
        assert!(matches!(
            idx.query(&Vector::new(vec![1.0]).unwrap(), 1),
            Err(IndexError::QueryDim { expected: 4, got: 1 })
        ));
        assert!(matches!(
            idx.query(&Vector::new(vec![0.0; 4]).unwrap(), 0),
            Err(IndexError::ZeroK)
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fidx");
        let idx = small();
        idx.save(&path).unwrap();
        assert_eq!(FlatIndex::load(&path).unwrap(), idx);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = small().to_bytes();
        let err = FlatIndex::from_bytes(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, IndexError::Format(FormatError::Invalid { .. })));
    }

    #[test]
    fn plain_collection_is_not_an_index() {
        let bytes = cvec::encode(small().collection(), None);
        assert!(FlatIndex::from_bytes(&bytes).is_err());
    }

    fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f32>>> {
        prop::collection::vec(prop::collection::vec(-2i8..=2, 3).prop_map(|v| v.into_iter().map(f32::from).collect()), 1..30)
    }

    proptest! {
        #[test]
        fn k_prefix_property(rows in rows_strategy(), q in prop::collection::vec(-2i8..=2, 3)) {
            let recs: Vec<_> = rows.iter().enumerate().map(|(i, r)| rec(&format!("id{i:02}"), r)).collect();
            let idx = FlatIndex::build(&recs).unwrap();
            let q = Vector::new(q.into_iter().map(f32::from).collect()).unwrap();
            let full = idx.query(&q, recs.len() + 1).unwrap();
            for k in 1..=recs.len() {
                let hits = idx.query(&q, k).unwrap();
                prop_assert_eq!(&hits[..], &full[..k]);
            }
        }

        #[test]
        fn farther_row_leaves_top_k_unchanged(rows in rows_strategy(), q in prop::collection::vec(-2i8..=2, 3), k in 1usize..5) {
            let mut recs: Vec<_> = rows.iter().enumerate().map(|(i, r)| rec(&format!("id{i:02}"), r)).collect();
            let idx = FlatIndex::build(&recs).unwrap();
            let qv = Vector::new(q.iter().map(|&x| f32::from(x)).collect()).unwrap();
            let before = idx.query(&qv, k).unwrap();
            recs.push(rec("far", &[100.0, 100.0, 100.0]));
            let after = FlatIndex::build(&recs).unwrap().query(&qv, k).unwrap();
            if before.len() == k {
                prop_assert_eq!(before, after);
            }
        }

        #[test]
        fn row_permutation_keeps_results(rows in rows_strategy(), q in prop::collection::vec(-2i8..=2, 3), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut recs: Vec<_> = rows.iter().enumerate().map(|(i, r)| rec(&format!("id{i:02}"), r)).collect();
            let qv = Vector::new(q.iter().map(|&x| f32::from(x)).collect()).unwrap();
            let a = FlatIndex::build(&recs).unwrap().query(&qv, 5).unwrap();
            recs.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = FlatIndex::build(&recs).unwrap().query(&qv, 5).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
