//! Lexicon-frequency emotion scorer.
//!
//! Each score is the share of emotion-tagged tokens carrying that emotion, so
//! the four scores sum to 1 whenever any tagged token occurs and `es`, their
//! mean, is then exactly 0.25. Absolute values are only comparable between
//! runs that use the same lexicon.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::vader::LexiconError;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionTag {
    Happy,
    Angry,
    Surprise,
    Fear,
}

impl FromStr for EmotionTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "happy" => Ok(Self::Happy),
            "angry" => Ok(Self::Angry),
            "surprise" => Ok(Self::Surprise),
            "fear" => Ok(Self::Fear),
            other => Err(format!("unknown emotion tag {other:?}")),
        }
    }
}

impl fmt::Display for EmotionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Happy => "happy",
            Self::Angry => "angry",
            Self::Surprise => "surprise",
            Self::Fear => "fear",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmotionLexicon {
    tags: HashMap<String, EmotionTag>,
}

impl EmotionLexicon {
    /// Parses `token<TAB>emotion` lines. Blank lines and `#` comments are
    /// skipped; tokens are lowercased.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut tags = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| LexiconError { line: i + 1, reason };
            let (token, tag) = line
                .split_once('\t')
                .ok_or_else(|| err("expected token<TAB>emotion".into()))?;
            let tag: EmotionTag = tag.trim().parse().map_err(err)?;
            let token = token.trim().to_lowercase();
            if token.is_empty() {
                return Err(err("empty token".into()));
            }
            if tags.insert(token.clone(), tag).is_some_and(|old| old != tag) {
                return Err(err(format!("token {token:?} tagged twice")));
            }
        }
        Ok(Self { tags })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, EmotionTag)>) -> Self {
        Self {
            tags: pairs.into_iter().map(|(t, e)| (t.to_lowercase(), e)).collect(),
        }
    }

    /// The lexicon shipped in `data/emotion_lexicon.tsv`.
    pub fn bundled() -> &'static EmotionLexicon {
        static LEX: OnceLock<EmotionLexicon> = OnceLock::new();
        LEX.get_or_init(|| {
            Self::parse(include_str!("../../data/emotion_lexicon.tsv"))
                .expect("bundled emotion lexicon is well-formed")
        })
    }

    pub fn get(&self, token: &str) -> Option<EmotionTag> {
        self.tags.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionScores {
    pub happy: f64,
    pub angry: f64,
    pub surprise: f64,
    pub fear: f64,
    pub es: f64,
}

pub fn emotion_scores(text: &str, lex: &EmotionLexicon) -> EmotionScores {
    let mut counts = [0u64; 4];
    for tok in tokenize(text) {
        if let Some(tag) = lex.get(&tok) {
            counts[tag as usize] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let share = |c: u64| if total == 0 { 0.0 } else { c as f64 / total as f64 };
    let [h, a, s, f] = counts.map(share);
    EmotionScores {
        happy: h,
        angry: a,
        surprise: s,
        fear: f,
        es: (h + a + s + f) / 4.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> EmotionLexicon {
        EmotionLexicon::from_pairs([("terrified", EmotionTag::Fear), ("furious", EmotionTag::Angry)])
    }

    #[test]
    fn no_tagged_tokens() {
        let s = emotion_scores("the mouse broke", &fixture());
        assert_eq!((s.happy, s.angry, s.surprise, s.fear, s.es), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn single_angry_token() {
        let s = emotion_scores("I am furious", &fixture());
        assert_eq!((s.angry, s.es), (1.0, 0.25));
    }

    #[test]
    fn mixed_counts() {
        let s = emotion_scores("terrified and furious and terrified", &fixture());
        assert!((s.fear - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.angry - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.es - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bundled_parses() {
        let lex = EmotionLexicon::bundled();
        assert!(lex.len() > 100);
        assert_eq!(lex.get("terrified"), Some(EmotionTag::Fear));
        assert_eq!(lex.get("furious"), Some(EmotionTag::Angry));
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = EmotionLexicon::parse("ok\thappy\nbad line\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(EmotionLexicon::parse("x\tsad").is_err());
    }
}
