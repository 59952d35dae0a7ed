//! Aspect retention: whether each gold complaint aspect survives in the
//! generated text, judged lexically or by an external classifier.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::{Classifier, ProviderError, RetryPolicy};
use crate::text::tokenize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AspectError {
    #[error("aspect list is empty")]
    NoAspects,
    #[error("classifier answered {0:?}, expected Yes or No")]
    UnexpectedAnswer(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictSource {
    Llm,
    Lexical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectVerdict {
    pub aspect: String,
    pub present: bool,
    pub source: VerdictSource,
}

fn stemmer() -> &'static Stemmer {
    static S: OnceLock<Stemmer> = OnceLock::new();
    S.get_or_init(|| Stemmer::create(Algorithm::English))
}

fn stems(text: &str) -> Vec<String> {
    tokenize(text)
        .iter()
        .map(|t| stemmer().stem(t).into_owned())
        .collect()
}

const BUILTIN: &[(&str, &[&str])] = &[
    ("quality", &["quality", "cheap", "cheaply made", "flimsy", "poorly made", "shoddy", "low grade"]),
    ("functionality", &["functionality", "function", "not work", "doesn t work", "stopped working", "won t work", "feature", "usable"]),
    ("defective", &["defective", "defect", "broken", "broke", "faulty", "damaged", "malfunction", "dead on arrival", "cracked"]),
    ("design", &["design", "designed", "style", "shape", "ergonomic", "uncomfortable", "look", "fit"]),
    ("missing", &["missing", "not included", "incomplete", "absent", "lacking"]),
    ("refund", &["refund", "money back", "reimburse", "return", "replacement"]),
    ("performance", &["performance", "perform", "slow", "lag", "laggy", "battery life", "speed"]),
    ("delay", &["delay", "delayed", "late", "shipping", "delivery", "took weeks"]),
];

/// Stemmed phrases that count as mentions of each aspect.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AspectLexicon {
    phrases: BTreeMap<String, Vec<Vec<String>>>,
}

impl AspectLexicon {
    /// Synonym table for the eight taxonomy aspects.
    pub fn builtin() -> &'static AspectLexicon {
        static LEX: OnceLock<AspectLexicon> = OnceLock::new();
        LEX.get_or_init(|| {
            let mut lex = AspectLexicon::default();
            for (aspect, syns) in BUILTIN {
                lex.add_synonyms(aspect, syns.iter().copied());
            }
            lex
        })
    }

    pub fn add_synonyms<'a>(&mut self, aspect: &str, synonyms: impl IntoIterator<Item = &'a str>) {
        let entry = self.phrases.entry(aspect.to_lowercase()).or_default();
        for s in synonyms {
            let p = stems(s);
            if !p.is_empty() && !entry.contains(&p) {
                entry.push(p);
            }
        }
    }

    /// True iff the aspect name itself or one of its synonyms occurs in `text`
    /// after stemming. Phrases must match contiguous tokens.
    pub fn present(&self, aspect: &str, text: &str) -> bool {
        let words = stems(text);
        let own = stems(aspect);
        let contains = |p: &[String]| !p.is_empty() && words.windows(p.len()).any(|w| w == p);
        if contains(&own) {
            return true;
        }
        self.phrases
            .get(&aspect.to_lowercase())
            .is_some_and(|ps| ps.iter().any(|p| contains(p)))
    }
}

/// Lexical check with the built-in synonym table.
pub fn lexical_present(aspect: &str, text: &str) -> bool {
    AspectLexicon::builtin().present(aspect, text)
}

/// The classifier question for one aspect.
pub fn aspect_prompt(aspect: &str, text: &str) -> String {
    format!("Is the aspect '{aspect}' present in the given '{text}'? Answer with only 'Yes' or 'No'.")
}

/// Recovers `(aspect, text)` from a prompt built by [`aspect_prompt`].
pub fn parse_prompt(prompt: &str) -> Option<(String, String)> {
    let rest = prompt.strip_prefix("Is the aspect '")?;
    let (aspect, rest) = rest.split_once("' present in the given '")?;
    let text = rest.strip_suffix("'? Answer with only 'Yes' or 'No'.")?;
    Some((aspect.to_string(), text.to_string()))
}

/// Maps the first alphabetic token of an answer to a boolean.
pub fn parse_yes_no(answer: &str) -> Result<bool, AspectError> {
    let first = answer
        .split(|c: char| !c.is_alphabetic())
        .find(|t| !t.is_empty())
        .unwrap_or("");
    if first.eq_ignore_ascii_case("yes") {
        Ok(true)
    } else if first.eq_ignore_ascii_case("no") {
        Ok(false)
    } else {
        log::warn!("unexpected classifier answer: {answer:?}");
        Err(AspectError::UnexpectedAnswer(answer.chars().take(80).collect()))
    }
}

/// How aspect presence is decided.
#[derive(Clone, Copy)]
pub enum AspectJudge<'a> {
    Lexical(&'a AspectLexicon),
    Llm {
        classifier: &'a dyn Classifier,
        retry: RetryPolicy,
    },
}

impl AspectJudge<'_> {
    pub fn source(&self) -> VerdictSource {
        match self {
            AspectJudge::Lexical(_) => VerdictSource::Lexical,
            AspectJudge::Llm { .. } => VerdictSource::Llm,
        }
    }
}

pub fn aspect_present(aspect: &str, text: &str, judge: AspectJudge<'_>) -> Result<AspectVerdict, AspectError> {
    let present = match judge {
        AspectJudge::Lexical(lex) => lex.present(aspect, text),
        AspectJudge::Llm { classifier, retry } => {
            let prompt = aspect_prompt(aspect, text);
            let answer = retry.run(|| classifier.classify(&prompt))?.value;
            parse_yes_no(&answer)?
        }
    };
    Ok(AspectVerdict {
        aspect: aspect.to_string(),
        present,
        source: judge.source(),
    })
}

/// Fraction of `aspects` judged present, with the individual verdicts.
pub fn aspect_score(
    aspects: &[String],
    text: &str,
    judge: AspectJudge<'_>,
) -> Result<(f64, Vec<AspectVerdict>), AspectError> {
    if aspects.is_empty() {
        return Err(AspectError::NoAspects);
    }
    let verdicts = aspects
        .iter()
        .map(|a| aspect_present(a, text, judge))
        .collect::<Result<Vec<_>, _>>()?;
    let hits = verdicts.iter().filter(|v| v.present).count();
    Ok((hits as f64 / aspects.len() as f64, verdicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::mock::ScriptedClassifier;

    fn lexical() -> AspectJudge<'static> {
        AspectJudge::Lexical(AspectLexicon::builtin())
    }

    #[test]
    fn lemma_match() {
        assert!(lexical_present("Defective", "the mouse is defective"));
        assert!(!lexical_present("Refund", "the scroll wheel broke"));
        assert!(lexical_present("Refund", "They refused to refund me."));
        assert!(lexical_present("Functionality", "it stopped working"));
        assert!(lexical_present("Delay", "the package was delayed"));
    }

    #[test]
    fn custom_synonyms() {
        let mut lex = AspectLexicon::default();
        lex.add_synonyms("Sizing", ["too small"]);
        assert!(lex.present("Sizing", "The shoes were way too small."));
        assert!(!lex.present("Sizing", "too big, small print"));
    }

    #[test]
    fn prompt_round_trip() {
        let p = aspect_prompt("Quality", "it's cheap");
        assert_eq!(
            p,
            "Is the aspect 'Quality' present in the given 'it's cheap'? Answer with only 'Yes' or 'No'."
        );
        assert_eq!(parse_prompt(&p), Some(("Quality".into(), "it's cheap".into())));
    }

    #[test]
    fn yes_no_parsing() {
        assert_eq!(parse_yes_no("Yes"), Ok(true));
        assert_eq!(parse_yes_no("  no."), Ok(false));
        assert_eq!(parse_yes_no("YES, it is"), Ok(true));
        assert!(matches!(parse_yes_no("Maybe"), Err(AspectError::UnexpectedAnswer(_))));
        assert!(parse_yes_no("").is_err());
        assert!(parse_yes_no("Yesterday").is_err());
    }

    #[test]
    fn llm_mode_maps_answer() {
        let c = ScriptedClassifier::always("Yes");
        let judge = AspectJudge::Llm {
            classifier: &c,
            retry: RetryPolicy::none(),
        };
        let v = aspect_present("Refund", "anything", judge).unwrap();
        assert!(v.present);
        assert_eq!(v.source, VerdictSource::Llm);
    }

    #[test]
    fn llm_retries_network_failures() {
        let c = ScriptedClassifier::new(vec![Err(ProviderError::Timeout(5)), Ok("No".into())]);
        let judge = AspectJudge::Llm {
            classifier: &c,
            retry: RetryPolicy::immediate(1),
        };
        assert!(!aspect_present("Refund", "x", judge).unwrap().present);
    }

    #[test]
    fn scores_count_fraction() {
        let aspects: Vec<String> = ["Defective", "Refund", "Delay"].map(String::from).to_vec();
        let (s, v) = aspect_score(&aspects, "defective item, delivery was late", lexical()).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(v.len(), 3);
        assert!(matches!(aspect_score(&[], "x", lexical()), Err(AspectError::NoAspects)));
    }
}
