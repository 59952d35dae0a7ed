//! Embedding-based similarity: greedy-matching BERTScore and a transport
//! based MoverScore. Tokens are embedded one per provider input.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::lexical::TokenizedPair;
use super::transport;
use crate::provider::{check_embeddings, Embedder, ProviderError, RetryPolicy};

/// Above this many tokens on either side MoverScore uses the relaxed bound.
pub const EXACT_TRANSPORT_LIMIT: usize = 64;

type TokenVectors = HashMap<String, Vec<f64>>;

/// Embeds the union vocabulary of both sides in one sorted request.
fn embed_vocab(pair: &TokenizedPair, embedder: &dyn Embedder, retry: RetryPolicy) -> Result<TokenVectors, ProviderError> {
    let vocab: Vec<String> = pair
        .candidate
        .iter()
        .chain(&pair.reference)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let emb = retry.run(|| embedder.embed_text(&vocab))?.value;
    check_embeddings(vocab.len(), &emb)?;
    Ok(vocab
        .into_iter()
        .zip(emb.vectors)
        .map(|(t, v)| (t, v.into_iter().map(f64::from).collect()))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d = (dot(a, a) * dot(b, b)).sqrt();
    if d == 0.0 {
        0.0
    } else {
        (dot(a, b) / d).clamp(-1.0, 1.0)
    }
}

fn raw_weights(tokens: &[String], idf: Option<&HashMap<String, f64>>) -> Vec<f64> {
    tokens
        .iter()
        .map(|t| idf.map_or(1.0, |m| m.get(t).copied().unwrap_or(1.0)))
        .collect()
}

/// Token masses summing to 1; uniform when every weight is zero.
fn weights(tokens: &[String], idf: Option<&HashMap<String, f64>>) -> Vec<f64> {
    let raw = raw_weights(tokens, idf);
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / tokens.len() as f64; tokens.len()]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BertScoreOptions {
    pub idf: Option<HashMap<String, f64>>,
    /// When set, scores are rescaled as `(x - b) / (1 - b)`.
    pub baseline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

/// Precision is the (weighted) mean over candidate tokens of their best
/// cosine against the reference; recall is the mirror image.
pub fn bertscore(
    pair: &TokenizedPair,
    embedder: &dyn Embedder,
    opts: &BertScoreOptions,
    retry: RetryPolicy,
) -> Result<BertScore, ProviderError> {
    if pair.candidate.is_empty() || pair.reference.is_empty() {
        return Ok(BertScore {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            degenerate: true,
        });
    }
    let vecs = embed_vocab(pair, embedder, retry)?;
    Ok(bertscore_from_vectors(pair, &vecs, opts))
}

fn bertscore_from_vectors(pair: &TokenizedPair, vecs: &TokenVectors, opts: &BertScoreOptions) -> BertScore {
    // divide once at the end so a perfect match is exactly 1
    let greedy = |from: &[String], to: &[String]| -> f64 {
        let w = raw_weights(from, opts.idf.as_ref());
        let total: f64 = w.iter().sum();
        let acc: f64 = from
            .iter()
            .zip(&w)
            .map(|(t, wt)| {
                let best = to
                    .iter()
                    .map(|u| cosine(&vecs[t], &vecs[u]))
                    .fold(f64::NEG_INFINITY, f64::max);
                wt * best
            })
            .sum();
        if total > 0.0 {
            acc / total
        } else {
            0.0
        }
    };
    let rescale = |x: f64| opts.baseline.map_or(x, |b| (x - b) / (1.0 - b));
    let precision = rescale(greedy(&pair.candidate, &pair.reference));
    let recall = rescale(greedy(&pair.reference, &pair.candidate));
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    BertScore {
        precision,
        recall,
        f1,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoverScore {
    /// `1 - cost`, in [-1, 1].
    pub score: f64,
    /// Transport cost between unit-normalized token embeddings, in [0, 2].
    pub cost: f64,
    /// False when the relaxed bound replaced the exact solution.
    pub exact: bool,
    pub degenerate: bool,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Transport-based similarity over unit-normalized token embeddings with
/// Euclidean ground cost and uniform (or IDF) token masses.
pub fn moverscore(
    pair: &TokenizedPair,
    embedder: &dyn Embedder,
    idf: Option<&HashMap<String, f64>>,
    retry: RetryPolicy,
) -> Result<MoverScore, ProviderError> {
    if pair.candidate.is_empty() || pair.reference.is_empty() {
        return Ok(MoverScore {
            score: 0.0,
            cost: 0.0,
            exact: true,
            degenerate: true,
        });
    }
    let vecs = embed_vocab(pair, embedder, retry)?;
    let vecs: TokenVectors = vecs.into_iter().map(|(k, v)| (k, unit(&v))).collect();
    Ok(moverscore_from_vectors(pair, &vecs, idf))
}

fn moverscore_from_vectors(pair: &TokenizedPair, vecs: &TokenVectors, idf: Option<&HashMap<String, f64>>) -> MoverScore {
    let cost: Vec<Vec<f64>> = pair
        .candidate
        .iter()
        .map(|c| pair.reference.iter().map(|r| euclid(&vecs[c], &vecs[r])).collect())
        .collect();
    let a = weights(&pair.candidate, idf);
    let b = weights(&pair.reference, idf);
    let exact = pair.candidate.len() <= EXACT_TRANSPORT_LIMIT && pair.reference.len() <= EXACT_TRANSPORT_LIMIT;
    let cost = if exact {
        transport::exact_cost(&a, &b, &cost)
    } else {
        transport::relaxed_cost(&a, &b, &cost)
    };
    MoverScore {
        score: 1.0 - cost,
        cost,
        exact,
        degenerate: false,
    }
}
