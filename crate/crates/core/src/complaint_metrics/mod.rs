//! Complaint Retention (CR): how much of a complaint's sentiment, emotional
//! intensity and gold aspects a generated description keeps.
//!
//! `cr = (s_nvader + es + aspect_score) / 3`, where `s_nvader` is the mean
//! VADER compound per sentence mapped to [0, 1].

pub mod aspect;
pub mod emotion;
pub mod vader;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::split_sentences;

pub use aspect::{aspect_present, aspect_score, AspectError, AspectJudge, AspectLexicon, AspectVerdict};
pub use emotion::{emotion_scores, EmotionLexicon, EmotionScores, EmotionTag};
pub use vader::{LexiconError, SentimentLexicon};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{0} must not be empty")]
    Empty(&'static str),
}

fn in_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64, InputError> {
    if (lo..=hi).contains(&value) {
        Ok(value)
    } else {
        Err(InputError::OutOfRange { name, value, lo, hi })
    }
}

pub fn vader_compound(sentence: &str, lex: &SentimentLexicon) -> f64 {
    lex.compound(sentence)
}

/// Maps a compound score from [-1, 1] onto [0, 1].
pub fn normalize_sentiment(s: f64) -> Result<f64, InputError> {
    Ok((in_range("compound", s, -1.0, 1.0)? + 1.0) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentBreakdown {
    pub per_sentence_compound: Vec<f64>,
    pub per_sentence_normalized: Vec<f64>,
    /// Mean normalized score; 0.5 for text without sentences.
    pub sample_mean: f64,
    pub sentence_count: usize,
}

impl SentimentBreakdown {
    /// Mean raw compound; 0 for text without sentences.
    pub fn compound_mean(&self) -> f64 {
        mean(&self.per_sentence_compound).unwrap_or(0.0)
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn sample_sentiment(text: &str, lex: &SentimentLexicon) -> SentimentBreakdown {
    let per_sentence_compound: Vec<f64> = split_sentences(text)
        .into_iter()
        .map(|s| lex.compound(s))
        .collect();
    let per_sentence_normalized: Vec<f64> = per_sentence_compound
        .iter()
        .map(|&c| normalize_sentiment(c).expect("compound is clamped to [-1, 1]"))
        .collect();
    SentimentBreakdown {
        sample_mean: mean(&per_sentence_normalized).unwrap_or(0.5),
        sentence_count: per_sentence_compound.len(),
        per_sentence_compound,
        per_sentence_normalized,
    }
}

/// Mean of the per-sample means.
pub fn corpus_sentiment(breakdowns: &[SentimentBreakdown]) -> Result<f64, InputError> {
    let means: Vec<f64> = breakdowns.iter().map(|b| b.sample_mean).collect();
    mean(&means).ok_or(InputError::Empty("sentiment breakdowns"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CRBreakdown {
    pub s_nvader: f64,
    pub es: f64,
    pub aspect_score: f64,
    pub cr: f64,
}

pub fn cr_score(s_nvader: f64, es: f64, aspect_score: f64) -> Result<CRBreakdown, InputError> {
    let s_nvader = in_range("s_nvader", s_nvader, 0.0, 1.0)?;
    let es = in_range("es", es, 0.0, 1.0)?;
    let aspect_score = in_range("aspect_score", aspect_score, 0.0, 1.0)?;
    Ok(CRBreakdown {
        s_nvader,
        es,
        aspect_score,
        cr: (s_nvader + es + aspect_score) / 3.0,
    })
}

/// Every CR ingredient for one generated text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplaintScores {
    pub sentiment: SentimentBreakdown,
    pub emotion: EmotionScores,
    pub aspects: Vec<AspectVerdict>,
    pub cr: CRBreakdown,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error(transparent)]
    Aspect(#[from] AspectError),
    #[error(transparent)]
    Input(#[from] InputError),
}

pub fn score_complaint(
    text: &str,
    gold_aspects: &[String],
    sentiment: &SentimentLexicon,
    emotions: &EmotionLexicon,
    judge: AspectJudge<'_>,
) -> Result<ComplaintScores, ScoreError> {
    let s = sample_sentiment(text, sentiment);
    let e = emotion_scores(text, emotions);
    let (a, verdicts) = aspect_score(gold_aspects, text, judge)?;
    let cr = cr_score(s.sample_mean, e.es, a)?;
    Ok(ComplaintScores {
        sentiment: s,
        emotion: e,
        aspects: verdicts,
        cr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_endpoints() {
        assert_eq!(normalize_sentiment(-1.0), Ok(0.0));
        assert_eq!(normalize_sentiment(0.0), Ok(0.5));
        assert_eq!(normalize_sentiment(1.0), Ok(1.0));
        assert!(normalize_sentiment(1.5).is_err());
        assert!(normalize_sentiment(f64::NAN).is_err());
    }

    #[test]
    fn empty_text_is_neutral() {
        let b = sample_sentiment("", SentimentLexicon::bundled());
        assert_eq!(b.sentence_count, 0);
        assert_eq!(b.sample_mean, 0.5);
        assert_eq!(b.compound_mean(), 0.0);
    }

    #[test]
    fn one_sentence_mean() {
        let lex = SentimentLexicon::bundled();
        let b = sample_sentiment("The product is good.", lex);
        assert_eq!(b.sentence_count, 1);
        assert_eq!(b.sample_mean, (lex.compound("The product is good.") + 1.0) / 2.0);
    }

    #[test]
    fn symmetric_compounds_average_to_half() {
        let lex = SentimentLexicon::parse("great\t4.0\t0\t[]\nawful\t-4.0\t0\t[]\n").unwrap();
        let b = sample_sentiment("Great. Awful.", &lex);
        assert_eq!(b.sentence_count, 2);
        assert_eq!(b.per_sentence_compound[0], -b.per_sentence_compound[1]);
        assert!((b.sample_mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn corpus_means() {
        let mk = |m: f64| SentimentBreakdown {
            per_sentence_compound: vec![],
            per_sentence_normalized: vec![],
            sample_mean: m,
            sentence_count: 0,
        };
        assert_eq!(corpus_sentiment(&[mk(0.4)]), Ok(0.4));
        assert_eq!(corpus_sentiment(&[mk(0.2), mk(0.8)]), Ok(0.5));
        assert!(corpus_sentiment(&[]).is_err());
    }

    #[test]
    fn cr_examples() {
        assert_eq!(cr_score(0.0, 0.0, 0.0).unwrap().cr, 0.0);
        assert_eq!(cr_score(1.0, 1.0, 1.0).unwrap().cr, 1.0);
        assert!((cr_score(0.5, 0.25, 1.0).unwrap().cr - 0.5833333333333334).abs() < 1e-15);
        assert!(matches!(
            cr_score(0.5, -0.1, 0.0),
            Err(InputError::OutOfRange { name: "es", .. })
        ));
    }

    proptest! {
        #[test]
        fn normalize_is_affine_and_monotone(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            let (na, nb) = (normalize_sentiment(a).unwrap(), normalize_sentiment(b).unwrap());
            prop_assert!((na - (a + 1.0) / 2.0).abs() < 1e-15);
            if a < b { prop_assert!(na < nb); }
        }

        #[test]
        fn cr_symmetric_bounded_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0, d in 0.0f64..=1.0) {
            let base = cr_score(a, b, c).unwrap().cr;
            for perm in [cr_score(b, c, a), cr_score(c, a, b), cr_score(b, a, c)] {
                prop_assert!((perm.unwrap().cr - base).abs() < 1e-15);
            }
            prop_assert!((0.0..=1.0).contains(&base));
            let hi = a.max(d);
            prop_assert!(cr_score(hi, b, c).unwrap().cr >= base);
        }

        #[test]
        fn emotion_shares_sum(words in prop::collection::vec(prop::sample::select(vec!["furious", "terrified", "happy", "wow", "table", "chair"]), 0..12)) {
            let s = emotion_scores(&words.join(" "), EmotionLexicon::bundled());
            let sum = s.happy + s.angry + s.surprise + s.fear;
            prop_assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-12);
            prop_assert!((s.es - sum / 4.0).abs() < 1e-15);
        }

        #[test]
        fn aspect_score_permutation_invariant(mut aspects in prop::collection::vec(prop::sample::select(crate::corpus::ASPECTS.to_vec()), 1..6), rot in 0usize..6) {
            let text = "defective and late, no refund";
            let judge = AspectJudge::Lexical(AspectLexicon::builtin());
            let a: Vec<String> = aspects.iter().map(|s| s.to_string()).collect();
            let (s1, _) = aspect_score(&a, text, judge).unwrap();
            let n = aspects.len();
            aspects.rotate_left(rot % n);
            let b: Vec<String> = aspects.iter().map(|s| s.to_string()).collect();
            let (s2, _) = aspect_score(&b, text, judge).unwrap();
            prop_assert_eq!(s1, s2);
        }
    }
}
