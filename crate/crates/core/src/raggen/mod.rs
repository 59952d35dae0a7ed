//! Retrieval-augmented complaint generation: prompt assembly, the generator
//! call, and the end-to-end pipeline with replayable provenance.

mod memory;
mod pipeline;
pub mod prompt;

pub use memory::{embed_reviews, MemoryError, ReviewMemory};
pub use pipeline::{
    load_video, run_all, Pipeline, PipelineConfig, Provenance, Stage, StageError, StageFailure, VideoInput,
};
pub use prompt::{
    assemble_prompt, prompt_hash, replay, AssembledPrompt, Context, PromptSpec, PromptTemplate, TemplateError,
    VideoSlot,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::provider::{GenerateRequest, Generator, ProviderError, RetryPolicy};

/// Default `max_tokens` sent with each generate request.
pub const DEFAULT_MAX_TOKENS: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedComplaint {
    pub review_id: String,
    pub text: String,
    pub model_id: String,
    /// sha256 of the exact rendered prompt.
    pub prompt_hash: String,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub complaint: GeneratedComplaint,
    pub retries: u32,
}

/// Sends the rendered prompt and returns the provider text verbatim.
///
/// Latency is what the provider reports, or wall-clock time around the
/// successful attempt when it reports nothing.
pub fn generate(
    review_id: &str,
    prompt: &AssembledPrompt,
    images_b64: Option<Vec<String>>,
    generator: &dyn Generator,
    retry: RetryPolicy,
    max_tokens: u32,
) -> Result<Generation, ProviderError> {
    let req = GenerateRequest {
        prompt: prompt.text.clone(),
        images_b64,
        max_tokens,
    };
    let out = retry.run(|| {
        let start = Instant::now();
        generator
            .generate(&req)
            .map(|(text, reported)| (text, reported.unwrap_or(start.elapsed().as_millis() as u64)))
    })?;
    let (text, latency_ms) = out.value;
    Ok(Generation {
        complaint: GeneratedComplaint {
            review_id: review_id.to_string(),
            text,
            model_id: generator.model_id(),
            prompt_hash: prompt.hash.clone(),
            latency_ms,
        },
        retries: out.retries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Domain, Emotion};
    use crate::provider::mock::ScriptedGenerator;

    fn prompt() -> AssembledPrompt {
        assemble_prompt(
            Emotion::Blame,
            "Kettle",
            Domain::Household,
            &[],
            &PromptTemplate::default(),
            true,
            false,
            VideoSlot::Handle { handle: "v1".into() },
        )
        .unwrap()
    }

    #[test]
    fn passthrough() {
        let p = prompt();
        let g = generate("r1", &p, None, &ScriptedGenerator::always("X"), RetryPolicy::none(), 16).unwrap();
        assert_eq!(g.complaint.text, "X");
        assert_eq!(g.complaint.prompt_hash, p.hash);
        assert_eq!(g.complaint.model_id, "mock:scripted");
        assert_eq!(g.retries, 0);
    }

    #[test]
    fn retries_are_counted() {
        let gen = ScriptedGenerator::new(vec![
            Err(ProviderError::Timeout(5)),
            Err(ProviderError::Unavailable("down".into())),
            Ok("ok".into()),
        ]);
        let g = generate("r1", &prompt(), None, &gen, RetryPolicy::immediate(3), 16).unwrap();
        assert_eq!((g.complaint.text.as_str(), g.retries), ("ok", 2));
        assert_eq!(gen.calls(), 3);
    }

    #[test]
    fn bounded_attempts() {
        let gen = ScriptedGenerator::failing(ProviderError::Timeout(5));
        let err = generate("r1", &prompt(), None, &gen, RetryPolicy::immediate(1), 16).unwrap_err();
        assert!(matches!(err, ProviderError::RetriesExhausted { attempts: 2, .. }));
        assert_eq!(gen.calls(), 2);
    }

    #[test]
    fn status_errors_are_not_retried() {
        let gen = ScriptedGenerator::failing(ProviderError::Status {
            status: 500,
            excerpt: "boom".into(),
        });
        let err = generate("r1", &prompt(), None, &gen, RetryPolicy::immediate(3), 16).unwrap_err();
        assert!(err.to_string().contains("boom"));
        assert_eq!(gen.calls(), 1);
    }
}
