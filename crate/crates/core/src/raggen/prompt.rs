//! Line-oriented prompt templates.
//!
//! A layout is a list of lines with `{name}` placeholders. A line made of a
//! single placeholder that expands to nothing is dropped, so optional parts
//! (emotion, contexts) leave no blank lines behind.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Domain, Emotion};

pub const DEFAULT_TEMPLATE_ID: &str = "default-v1";

const DEFAULT_INSTRUCTION: &str = "You are assisting a customer. Watch the video and write the customer's complaint. Write 2-4 sentences starting with 'The user wants to convey'.";
const DEFAULT_LAYOUT: &str = "{instruction}\n{emotion_line}\n{contexts}\n{video}";

const PLACEHOLDERS: [&str; 6] = ["instruction", "emotion_line", "contexts", "video", "product_name", "domain"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("template {template:?} uses unknown placeholder {{{name}}}")]
    UnknownPlaceholder { template: String, name: String },
    #[error("template {template:?} has an unterminated placeholder on line {line}")]
    Unterminated { template: String, line: usize },
    #[error("{0} contexts exceed the configured k = {1}")]
    TooManyContexts(usize, usize),
    #[error("rendered prompt hash {got} does not match recorded {expected}")]
    HashMismatch { expected: String, got: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub instruction: String,
    pub layout: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            id: DEFAULT_TEMPLATE_ID.into(),
            instruction: DEFAULT_INSTRUCTION.into(),
            layout: DEFAULT_LAYOUT.into(),
        }
    }
}

impl PromptTemplate {
    /// Checks that every placeholder is known and terminated.
    pub fn validate(&self) -> Result<(), TemplateError> {
        for (i, line) in self.layout.lines().enumerate() {
            substitute(&self.id, i + 1, line, |_| Some(String::new()))?;
        }
        Ok(())
    }
}

/// One retrieved review, resolved to its text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_id: Option<String>,
}

/// What stands in for the video in the prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VideoSlot {
    /// Keyframe images are attached to the generate request.
    KeyframeImages { indices: Vec<usize> },
    /// Only precomputed frame vectors exist; the prompt carries the marker.
    KeyframeVectors { indices: Vec<usize> },
    /// An identifier the provider resolves itself.
    Handle { handle: String },
}

impl VideoSlot {
    fn marker(&self) -> String {
        match self {
            VideoSlot::KeyframeImages { indices } | VideoSlot::KeyframeVectors { indices } => {
                let ix: Vec<String> = indices.iter().map(usize::to_string).collect();
                format!("[video: keyframes {}]", ix.join(", "))
            }
            VideoSlot::Handle { handle } => format!("[video: {handle}]"),
        }
    }
}

/// Everything needed to render a prompt. Stored in provenance so the exact
/// prompt can be re-rendered offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub template: PromptTemplate,
    pub emotion: Option<Emotion>,
    pub contexts: Vec<Context>,
    pub video_slot: VideoSlot,
    pub product_name: String,
    pub domain: Domain,
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn substitute(
    template: &str,
    line_no: usize,
    line: &str,
    mut value: impl FnMut(&str) -> Option<String>,
) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or_else(|| TemplateError::Unterminated {
            template: template.into(),
            line: line_no,
        })?;
        let name = &after[..close];
        if !PLACEHOLDERS.contains(&name) {
            return Err(TemplateError::UnknownPlaceholder {
                template: template.into(),
                name: name.into(),
            });
        }
        out.push_str(&value(name).unwrap_or_default());
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl PromptSpec {
    pub fn render(&self) -> Result<String, TemplateError> {
        let value = |name: &str| -> Option<String> {
            Some(match name {
                "instruction" => self.template.instruction.clone(),
                "emotion_line" => self
                    .emotion
                    .map(|e| format!("User emotional state: {}", e.as_str()))
                    .unwrap_or_default(),
                "contexts" => {
                    if self.contexts.is_empty() {
                        String::new()
                    } else {
                        let mut s = String::from("Similar past complaints:");
                        for (i, c) in self.contexts.iter().enumerate() {
                            s.push_str(&format!("\n{}. [{}] {}", i + 1, c.id, one_line(&c.text)));
                        }
                        s
                    }
                }
                "video" => self.video_slot.marker(),
                "product_name" => one_line(&self.product_name),
                "domain" => self.domain.as_str().to_string(),
                _ => return None,
            })
        };
        let mut lines = Vec::new();
        for (i, line) in self.template.layout.lines().enumerate() {
            let rendered = substitute(&self.template.id, i + 1, line, value)?;
            let lone_placeholder = line.trim().starts_with('{') && line.trim().ends_with('}') && line.trim().matches('{').count() == 1;
            if lone_placeholder && rendered.trim().is_empty() {
                continue;
            }
            lines.push(rendered);
        }
        Ok(lines.join("\n"))
    }
}

pub fn prompt_hash(rendered: &str) -> String {
    hex::encode(Sha256::digest(rendered.as_bytes()))
}

/// A rendered prompt with its digest.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledPrompt {
    pub spec: PromptSpec,
    pub text: String,
    pub hash: String,
}

/// Builds and renders the prompt for one record. With `dedup_by_product`,
/// later contexts sharing a product id with an earlier one are dropped.
#[allow(clippy::too_many_arguments)]
pub fn assemble_prompt(
    emotion: Emotion,
    product_name: &str,
    domain: Domain,
    hits: &[Context],
    template: &PromptTemplate,
    include_emotion: bool,
    dedup_by_product: bool,
    video_slot: VideoSlot,
) -> Result<AssembledPrompt, TemplateError> {
    let mut contexts: Vec<Context> = Vec::with_capacity(hits.len());
    for h in hits {
        let dup = dedup_by_product
            && h.product_id
                .as_ref()
                .is_some_and(|p| contexts.iter().any(|c| c.product_id.as_ref() == Some(p)));
        if !dup {
            contexts.push(h.clone());
        }
    }
    let spec = PromptSpec {
        template: template.clone(),
        emotion: include_emotion.then_some(emotion),
        contexts,
        video_slot,
        product_name: product_name.to_string(),
        domain,
    };
    let text = spec.render()?;
    let hash = prompt_hash(&text);
    Ok(AssembledPrompt { spec, text, hash })
}

/// Re-renders a recorded prompt and checks it against the recorded hash.
pub fn replay(spec: &PromptSpec, expected_hash: &str) -> Result<String, TemplateError> {
    let text = spec.render()?;
    let got = prompt_hash(&text);
    if got != expected_hash {
        return Err(TemplateError::HashMismatch {
            expected: expected_hash.into(),
            got,
        });
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(id: &str, text: &str, product: Option<&str>) -> Context {
        Context {
            id: id.into(),
            text: text.into(),
            product_id: product.map(Into::into),
        }
    }

    fn slot() -> VideoSlot {
        VideoSlot::KeyframeImages {
            indices: vec![0, 3, 7, 8],
        }
    }

    fn build(hits: &[Context], emotion: bool, dedup: bool) -> AssembledPrompt {
        assemble_prompt(
            Emotion::Frustration,
            "Wireless mouse",
            Domain::Electronics,
            hits,
            &PromptTemplate::default(),
            emotion,
            dedup,
            slot(),
        )
        .unwrap()
    }

    #[test]
    fn default_rendering() {
        let p = build(&[ctx("r1", "Scroll wheel\nbroke.", None), ctx("r2", "Stopped working.", None)], true, false);
        assert_eq!(
            p.text,
            "You are assisting a customer. Watch the video and write the customer's complaint. Write 2-4 sentences starting with 'The user wants to convey'.\n\
             User emotional state: frustration\n\
             Similar past complaints:\n\
             1. [r1] Scroll wheel broke.\n\
             2. [r2] Stopped working.\n\
             [video: keyframes 0, 3, 7, 8]"
        );
        assert_eq!(p.hash.len(), 64);
    }

    #[test]
    fn emotion_toggle_changes_one_line() {
        let hits = [ctx("r1", "x", None)];
        let with: Vec<String> = build(&hits, true, false).text.lines().map(String::from).collect();
        let without: Vec<String> = build(&hits, false, false).text.lines().map(String::from).collect();
        assert_eq!(with.len(), without.len() + 1);
        let removed: Vec<&String> = with.iter().filter(|l| !without.contains(l)).collect();
        assert_eq!(removed, ["User emotional state: frustration"]);
        assert!(!without.iter().any(|l| l.contains("emotional")));
    }

    #[test]
    fn no_hits_gives_instruction_and_video_only() {
        let p = build(&[], false, false);
        let lines: Vec<&str> = p.text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("[video:"));
    }

    #[test]
    fn deterministic_hash() {
        let hits = [ctx("r1", "x", None)];
        assert_eq!(build(&hits, true, false).hash, build(&hits, true, false).hash);
    }

    #[test]
    fn dedup_by_product() {
        let hits = [ctx("a", "1", Some("p1")), ctx("b", "2", Some("p1")), ctx("c", "3", None), ctx("d", "4", None)];
        assert_eq!(build(&hits, false, true).spec.contexts.len(), 3);
        assert_eq!(build(&hits, false, false).spec.contexts.len(), 4);
    }

    #[test]
    fn template_errors() {
        let t = PromptTemplate {
            id: "bad".into(),
            instruction: "x".into(),
            layout: "{instruction}\n{nope}".into(),
        };
        let err = t.validate().unwrap_err();
        assert!(matches!(err, TemplateError::UnknownPlaceholder { ref name, .. } if name == "nope"));
        let t = PromptTemplate {
            layout: "{instruction".into(),
            ..t
        };
        assert!(matches!(t.validate(), Err(TemplateError::Unterminated { line: 1, .. })));
    }

    #[test]
    fn custom_layout_with_inline_placeholders() {
        let t = PromptTemplate {
            id: "inline".into(),
            instruction: "Describe it.".into(),
            layout: "{instruction}\nProduct: {product_name} ({domain})\n{video}".into(),
        };
        let p = assemble_prompt(Emotion::Blame, "Tote bag", Domain::Fashion, &[], &t, true, false, slot()).unwrap();
        assert_eq!(p.text, "Describe it.\nProduct: Tote bag (Fashion)\n[video: keyframes 0, 3, 7, 8]");
    }

    #[test]
    fn replay_checks_hash() {
        let p = build(&[ctx("r1", "x", None)], true, false);
        assert_eq!(replay(&p.spec, &p.hash).unwrap(), p.text);
        assert!(matches!(replay(&p.spec, "00"), Err(TemplateError::HashMismatch { .. })));
    }
}
