//! Flesch Reading Ease and the Coleman-Liau index.

use serde::{Deserialize, Serialize};

use crate::text::{count_syllables, readability_words, split_sentences};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    /// Alphabetic characters anywhere in the text.
    pub letters: usize,
}

pub fn text_counts(text: &str) -> TextCounts {
    let words = readability_words(text);
    TextCounts {
        words: words.len(),
        sentences: split_sentences(text).len(),
        syllables: words.iter().map(|w| count_syllables(w)).sum(),
        letters: text.chars().filter(|c| c.is_alphabetic()).count(),
    }
}

/// `206.835 - 1.015 (words/sentences) - 84.6 (syllables/words)`; `None`
/// without words.
pub fn fres_from_counts(c: TextCounts) -> Option<f64> {
    if c.words == 0 || c.sentences == 0 {
        return None;
    }
    let w = c.words as f64;
    Some(206.835 - 1.015 * (w / c.sentences as f64) - 84.6 * (c.syllables as f64 / w))
}

/// `0.0588 L - 0.296 S - 15.8` with L letters and S sentences per 100 words.
pub fn coleman_liau_from_counts(c: TextCounts) -> Option<f64> {
    if c.words == 0 {
        return None;
    }
    let w = c.words as f64;
    let l = c.letters as f64 / w * 100.0;
    let s = c.sentences as f64 / w * 100.0;
    Some(0.0588 * l - 0.296 * s - 15.8)
}

pub fn flesch_reading_ease(text: &str) -> Option<f64> {
    fres_from_counts(text_counts(text))
}

pub fn coleman_liau(text: &str) -> Option<f64> {
    coleman_liau_from_counts(text_counts(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_fixtures() {
        let c = text_counts("The cat sat.");
        assert_eq!((c.words, c.sentences, c.syllables), (3, 1, 3));
        assert!((flesch_reading_ease("The cat sat.").unwrap() - 119.19).abs() < 1e-9);
        // L = 300, S = 100: 17.64 - 29.6 - 15.8
        assert!((coleman_liau("cat.").unwrap() - -27.76).abs() < 1e-9);
        let long = vec!["cat"; 20].join(" ") + ".";
        assert!((flesch_reading_ease(&long).unwrap() - 101.935).abs() < 1e-9);
    }

    #[test]
    fn from_counts() {
        let c = TextCounts {
            words: 100,
            sentences: 5,
            syllables: 0,
            letters: 500,
        };
        assert!((coleman_liau_from_counts(c).unwrap() - 12.12).abs() < 1e-9);
    }

    #[test]
    fn duplication_invariance() {
        let t = "The scroll wheel broke after two days. I want a refund!";
        let d = format!("{t} {t}");
        assert_eq!(flesch_reading_ease(t), flesch_reading_ease(&d));
        assert_eq!(coleman_liau(t), coleman_liau(&d));
    }

    #[test]
    fn no_words() {
        assert_eq!(flesch_reading_ease(""), None);
        assert_eq!(coleman_liau("... !!"), None);
    }
}
