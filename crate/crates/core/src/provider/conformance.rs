//! Contract checks for a live provider service: schema validity, dimension
//! consistency, unit-norm embeddings and the Yes/No classify mapping.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;

use super::protocol::GenerateRequest;
use super::{Classifier, Embedder, Generator, TokenScorer};
use crate::complaint_metrics::aspect::{aspect_prompt, parse_yes_no};

/// A 1x1 RGBA PNG, small enough to inline and decodable by any image stack.
const PIXEL_PNG: &str = "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNk+M9QDwADhgGAWjR9awAAAABJRU5ErkJggg==";

const NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, r: Result<(), String>) -> Check {
    match r {
        Ok(()) => Check {
            name,
            passed: true,
            detail: String::new(),
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn unit_norm(vectors: &[Vec<f32>]) -> Result<(), String> {
    for (i, v) in vectors.iter().enumerate() {
        let n = v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(format!("vector {i} has norm {n}"));
        }
    }
    Ok(())
}

/// Runs every check against one provider implementing all four roles.
pub fn run<P>(p: &P) -> Vec<Check>
where
    P: Embedder + Generator + Classifier + TokenScorer,
{
    let mut out = Vec::new();
    let texts = vec!["a".to_string(), "a".to_string()];
    let text_emb = p.embed_text(&texts).map_err(|e| e.to_string());
    out.push(check(
        "embed_text determinism",
        text_emb.as_ref().map_err(Clone::clone).and_then(|e| {
            if e.vectors[0] == e.vectors[1] {
                Ok(())
            } else {
                Err("identical inputs produced different vectors".into())
            }
        }),
    ));
    out.push(check(
        "embed_text unit norm",
        text_emb.as_ref().map_err(Clone::clone).and_then(|e| unit_norm(&e.vectors)),
    ));

    let pixel = B64.decode(PIXEL_PNG).expect("valid inline image");
    let img_emb = p.embed_image(&[pixel]).map_err(|e| e.to_string());
    out.push(check(
        "embed_image unit norm",
        img_emb.as_ref().map_err(Clone::clone).and_then(|e| unit_norm(&e.vectors)),
    ));
    out.push(check(
        "shared text/image dim",
        match (&text_emb, &img_emb) {
            (Ok(t), Ok(i)) if t.dim == i.dim => Ok(()),
            (Ok(t), Ok(i)) => Err(format!("text dim {} vs image dim {}", t.dim, i.dim)),
            _ => Err("embedding call failed".into()),
        },
    ));

    let answer = p
        .classify(&aspect_prompt("Defective", "the mouse is defective"))
        .map_err(|e| e.to_string());
    out.push(check(
        "classify answers Yes or No",
        answer.and_then(|a| parse_yes_no(&a).map(|_| ()).map_err(|e| e.to_string())),
    ));

    out.push(check(
        "score_tokens shape",
        p.score_tokens("the scroll wheel broke")
            .map_err(|e| e.to_string())
            .and_then(|r| {
                if r.tokens.is_empty() {
                    Err("no tokens returned".into())
                } else if r.tokens.len() != r.logprobs.len() {
                    Err("tokens and logprobs differ in length".into())
                } else if r.logprobs.iter().any(|&l| !l.is_finite() || l > 0.0) {
                    Err("logprobs must be finite and at most 0".into())
                } else {
                    Ok(())
                }
            }),
    ));

    out.push(check(
        "generate returns text",
        p.generate(&GenerateRequest {
            prompt: "Describe the image.".into(),
            images_b64: Some(vec![PIXEL_PNG.into()]),
            max_tokens: 32,
        })
        .map_err(|e| e.to_string())
        .and_then(|(t, _)| if t.trim().is_empty() { Err("empty text".into()) } else { Ok(()) }),
    ));
    out
}
