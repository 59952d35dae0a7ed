//! Tokenization, sentence segmentation and syllable counting shared by the
//! lexical metrics, the sentiment scorer and the readability formulas.
//!
//! Every rule here feeds numbers that end up in golden reports, so the rule
//! sets are versioned. Bump the matching constant when behavior changes.

/// Version of the word tokenizer rules.
pub const TOKENIZER_VERSION: u32 = 1;
/// Version of the syllable counting rules.
pub const SYLLABLE_RULES_VERSION: u32 = 1;

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "inc", "ltd",
    "co", "no", "approx", "fig", "dept", "est", "vol",
];

/// Case-folded word tokens. Any character that is not alphanumeric separates
/// tokens, so punctuation never appears in the output.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201d}' | '\u{2019}')
}

/// Splits text into sentences.
///
/// A sentence ends at a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) that is followed by whitespace or the end of the text. A single
/// period after a known abbreviation does not end a sentence. Returned slices
/// are trimmed and keep their terminal punctuation; empty segments are dropped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let at_end = j == chars.len();
        let before_space = !at_end && chars[j].1.is_whitespace();
        if !(at_end || before_space) {
            i = j;
            continue;
        }
        let single_period = c == '.' && j - run_start == 1;
        if single_period && !at_end && follows_abbreviation(&text[start..pos]) {
            i = j;
            continue;
        }
        let end = if at_end { text.len() } else { chars[j].0 };
        let segment = text[start..end].trim();
        if !segment.is_empty() {
            out.push(segment);
        }
        start = end;
        i = j;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

fn follows_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '"')
        .next()
        .unwrap_or("");
    let word = word.to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Word tokens for readability counts: whitespace-separated chunks with
/// leading/trailing punctuation removed, kept only if they contain a letter
/// or digit. Case is preserved.
pub fn readability_words(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .collect()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic English syllable count.
///
/// Counts vowel groups (`y` counts as a vowel), then removes a silent final
/// `e`, a silent `-ed` and a silent `-es`. Words of three letters or fewer
/// count as one syllable; any word with a letter counts at least one.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if w.is_empty() {
        return 0;
    }
    let n = w.len();
    if n <= 3 {
        return 1;
    }
    let mut groups = 0usize;
    let mut prev = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    if groups > 1 {
        let last = w[n - 1];
        let second = w[n - 2];
        let third = w[n - 3];
        if last == 'e' {
            let le_syllable = second == 'l' && !is_vowel(third);
            if !le_syllable && !is_vowel(second) {
                groups -= 1;
            }
        } else if last == 'd' && second == 'e' {
            if !matches!(third, 't' | 'd') && (!is_vowel(third) || third == 'y') {
                groups -= 1;
            }
        } else if last == 's' && second == 'e' {
            let sibilant = matches!(third, 's' | 'x' | 'z' | 'c' | 'g')
                || (third == 'h' && n >= 4 && matches!(w[n - 4], 's' | 'c'));
            if !sibilant && !is_vowel(third) {
                groups -= 1;
            }
        }
    }
    groups.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_folds_case_and_drops_punctuation() {
        assert_eq!(tokenize("The Mouse, is DEFECTIVE!"), ["the", "mouse", "is", "defective"]);
        assert!(tokenize("  ... ").is_empty());
    }

    #[test]
    fn sentences_split_on_terminal_punctuation() {
        let s = split_sentences("It broke. I want a refund!  Why?");
        assert_eq!(s, ["It broke.", "I want a refund!", "Why?"]);
    }

    #[test]
    fn sentence_without_terminal_is_kept() {
        assert_eq!(split_sentences("no punctuation here"), ["no punctuation here"]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn abbreviations_do_not_split() {
        let s = split_sentences("Dr. Smith sent it back. Mr. Jones did not.");
        assert_eq!(s, ["Dr. Smith sent it back.", "Mr. Jones did not."]);
    }

    #[test]
    fn decimals_and_runs() {
        let s = split_sentences("It cost 4.99 dollars!!! Terrible... Really?!");
        assert_eq!(s, ["It cost 4.99 dollars!!!", "Terrible...", "Really?!"]);
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let s = split_sentences("He said \"no.\" Then left.");
        assert_eq!(s, ["He said \"no.\"", "Then left."]);
    }

    #[test]
    fn syllable_rules() {
        for (w, n) in [
            ("the", 1),
            ("cat", 1),
            ("make", 1),
            ("table", 2),
            ("free", 1),
            ("jumped", 1),
            ("wanted", 2),
            ("played", 1),
            ("makes", 1),
            ("boxes", 2),
            ("wishes", 2),
            ("product", 2),
            ("defective", 3),
            ("headphone", 2),
            ("keyboard", 2),
            ("a", 1),
            ("", 0),
        ] {
            assert_eq!(count_syllables(w), n, "{w}");
        }
    }

    #[test]
    fn readability_words_strip_edges() {
        assert_eq!(readability_words("cat. -- (dog) 42"), ["cat", "dog", "42"]);
    }
}
