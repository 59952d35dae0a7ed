//! Rule-based sentence sentiment (VADER).
//!
//! A faithful port of the canonical reference implementation (version 3.3.2),
//! including its quirks, so that compound scores agree with it to floating
//! point precision. Constants below are the published ones.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use thiserror::Error;

const B_INCR: f64 = 0.293;
const B_DECR: f64 = -0.293;
const C_INCR: f64 = 0.733;
const N_SCALAR: f64 = -0.74;
/// Normalization constant approximating the maximum expected raw score.
const ALPHA: f64 = 15.0;
const EXCLAMATION_INCR: f64 = 0.292;
const QUESTION_INCR: f64 = 0.18;
const QUESTION_CAP: f64 = 0.96;

const NEGATE: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

const ASCII_PUNCTUATION: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

#[derive(Debug, Error, PartialEq)]
#[error("lexicon line {line}: {reason}")]
pub struct LexiconError {
    pub line: usize,
    pub reason: String,
}

struct Rules {
    negate: HashSet<&'static str>,
    boosters: HashMap<&'static str, f64>,
    special: HashMap<&'static str, f64>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        negate: NEGATE.iter().copied().collect(),
        boosters: BOOSTERS_UP
            .iter()
            .map(|w| (*w, B_INCR))
            .chain(BOOSTERS_DOWN.iter().map(|w| (*w, B_DECR)))
            .collect(),
        special: SPECIAL_CASES.iter().copied().collect(),
    })
}

/// Token valences plus the emoji-to-description table.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
    emojis: HashMap<char, String>,
}

impl SentimentLexicon {
    /// Parses the tab-separated `token  valence  stddev  ratings` format.
    /// Only the first two fields are used; later duplicates win.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut valences = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or_default();
            let measure = fields.next().ok_or_else(|| LexiconError {
                line: i + 1,
                reason: "missing valence field".into(),
            })?;
            let valence: f64 = measure.trim().parse().map_err(|_| LexiconError {
                line: i + 1,
                reason: format!("valence {measure:?} is not a number"),
            })?;
            valences.insert(token.to_string(), valence);
        }
        Ok(Self {
            valences,
            emojis: HashMap::new(),
        })
    }

    /// Adds an emoji table (`emoji TAB description` per line). Emojis are
    /// replaced by their description before scoring.
    pub fn with_emojis(mut self, text: &str) -> Result<Self, LexiconError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let emoji = fields.next().unwrap_or_default();
            let description = fields.next().ok_or_else(|| LexiconError {
                line: i + 1,
                reason: "missing description field".into(),
            })?;
            let mut chars = emoji.chars();
            // multi-codepoint sequences never match a single scanned char
            if let (Some(c), None) = (chars.next(), chars.next()) {
                self.emojis.insert(c, description.to_string());
            }
        }
        Ok(self)
    }

    /// The lexicon and emoji table shipped with the crate.
    pub fn bundled() -> &'static SentimentLexicon {
        static LEXICON: OnceLock<SentimentLexicon> = OnceLock::new();
        LEXICON.get_or_init(|| {
            SentimentLexicon::parse(include_str!("../../data/vader_lexicon.txt"))
                .and_then(|l| l.with_emojis(include_str!("../../data/emoji_utf8_lexicon.txt")))
                .expect("bundled lexicon is well-formed")
        })
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    fn contains(&self, word: &str) -> bool {
        self.valences.contains_key(word)
    }

    /// Compound sentiment of one sentence in `[-1, 1]`. Returns 0 when no
    /// token carries sentiment.
    pub fn compound(&self, text: &str) -> f64 {
        let text = self.replace_emojis(text);
        let text = text.trim();
        let words = words_and_emoticons(text);
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let cap_diff = allcap_differential(&words);
        let rules = rules();

        let mut sentiments = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            if rules.boosters.contains_key(lower[i].as_str()) {
                sentiments.push(0.0);
                continue;
            }
            if i + 1 < words.len() && lower[i] == "kind" && lower[i + 1] == "of" {
                sentiments.push(0.0);
                continue;
            }
            sentiments.push(self.valence(&words, &lower, i, cap_diff));
        }
        but_check(&lower, &mut sentiments);

        if sentiments.is_empty() {
            return 0.0;
        }
        let mut sum: f64 = sentiments.iter().fold(0.0, |a, s| a + s);
        let emphasis = punctuation_emphasis(text);
        if sum > 0.0 {
            sum += emphasis;
        } else if sum < 0.0 {
            sum -= emphasis;
        }
        normalize(sum)
    }

    fn replace_emojis(&self, text: &str) -> String {
        if self.emojis.is_empty() {
            return text.to_string();
        }
        let mut out = String::with_capacity(text.len());
        let mut prev_space = true;
        for c in text.chars() {
            if let Some(desc) = self.emojis.get(&c) {
                if !prev_space {
                    out.push(' ');
                }
                out.push_str(desc);
                prev_space = false;
            } else {
                out.push(c);
                prev_space = c == ' ';
            }
        }
        out
    }

    fn valence(&self, words: &[&str], lower: &[String], i: usize, cap_diff: bool) -> f64 {
        let Some(&base) = self.valences.get(&lower[i]) else {
            return 0.0;
        };
        let n = words.len();
        let mut valence = base;
        if lower[i] == "no" && i != n - 1 && self.contains(&lower[i + 1]) {
            valence = 0.0;
        }
        if (i > 0 && lower[i - 1] == "no")
            || (i > 1 && lower[i - 2] == "no")
            || (i > 2 && lower[i - 3] == "no" && (lower[i - 1] == "or" || lower[i - 1] == "nor"))
        {
            valence = base * N_SCALAR;
        }
        if is_upper(words[i]) && cap_diff {
            if valence > 0.0 {
                valence += C_INCR;
            } else {
                valence -= C_INCR;
            }
        }
        for start in 0..3 {
            if i > start && !self.contains(&lower[i - (start + 1)]) {
                let mut s = scalar_inc_dec(words[i - (start + 1)], valence, cap_diff);
                if start == 1 && s != 0.0 {
                    s *= 0.95;
                }
                if start == 2 && s != 0.0 {
                    s *= 0.9;
                }
                valence += s;
                valence = negation_check(valence, lower, start, i);
                if start == 2 {
                    valence = special_idioms_check(valence, lower, i);
                }
            }
        }
        self.least_check(valence, lower, i)
    }

    fn least_check(&self, valence: f64, lower: &[String], i: usize) -> f64 {
        if i > 1 && !self.contains(&lower[i - 1]) && lower[i - 1] == "least" {
            if lower[i - 2] != "at" && lower[i - 2] != "very" {
                return valence * N_SCALAR;
            }
        } else if i > 0 && !self.contains(&lower[i - 1]) && lower[i - 1] == "least" {
            return valence * N_SCALAR;
        }
        valence
    }
}

fn strip_punctuation(token: &str) -> &str {
    let stripped = token.trim_matches(|c| ASCII_PUNCTUATION.contains(c));
    // short remainders are likely emoticons such as ":)"
    if stripped.chars().count() <= 2 {
        token
    } else {
        stripped
    }
}

fn words_and_emoticons(text: &str) -> Vec<&str> {
    text.split_whitespace().map(strip_punctuation).collect()
}

/// Cased and with no lowercase letters.
fn is_upper(word: &str) -> bool {
    let mut cased = false;
    for c in word.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

fn allcap_differential(words: &[&str]) -> bool {
    let caps = words.iter().filter(|w| is_upper(w)).count();
    let diff = words.len() - caps;
    0 < diff && diff < words.len()
}

fn scalar_inc_dec(word: &str, valence: f64, cap_diff: bool) -> f64 {
    let Some(&b) = rules().boosters.get(word.to_lowercase().as_str()) else {
        return 0.0;
    };
    let mut scalar = if valence < 0.0 { -b } else { b };
    if is_upper(word) && cap_diff {
        if valence > 0.0 {
            scalar += C_INCR;
        } else {
            scalar -= C_INCR;
        }
    }
    scalar
}

fn negated(word: &str) -> bool {
    rules().negate.contains(word) || word.contains("n't")
}

fn negation_check(valence: f64, lower: &[String], start: usize, i: usize) -> f64 {
    let w = |k: usize| lower[i - k].as_str();
    match start {
        0 => {
            if negated(w(1)) {
                return valence * N_SCALAR;
            }
        }
        1 => {
            if w(2) == "never" && (w(1) == "so" || w(1) == "this") {
                return valence * 1.25;
            } else if w(2) == "without" && w(1) == "doubt" {
                return valence;
            } else if negated(w(2)) {
                return valence * N_SCALAR;
            }
        }
        2 => {
            // operator grouping mirrors the reference
            if (w(3) == "never" && (w(2) == "so" || w(2) == "this")) || (w(1) == "so" || w(1) == "this") {
                return valence * 1.25;
            } else if w(3) == "without" && (w(2) == "doubt" || w(1) == "doubt") {
                return valence;
            } else if negated(w(3)) {
                return valence * N_SCALAR;
            }
        }
        _ => {}
    }
    valence
}

fn special_idioms_check(mut valence: f64, lower: &[String], i: usize) -> f64 {
    let rules = rules();
    let onezero = format!("{} {}", lower[i - 1], lower[i]);
    let twoonezero = format!("{} {} {}", lower[i - 2], lower[i - 1], lower[i]);
    let twoone = format!("{} {}", lower[i - 2], lower[i - 1]);
    let threetwoone = format!("{} {} {}", lower[i - 3], lower[i - 2], lower[i - 1]);
    let threetwo = format!("{} {}", lower[i - 3], lower[i - 2]);

    for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
        if let Some(&v) = rules.special.get(seq.as_str()) {
            valence = v;
            break;
        }
    }
    if lower.len() - 1 > i {
        let zeroone = format!("{} {}", lower[i], lower[i + 1]);
        if let Some(&v) = rules.special.get(zeroone.as_str()) {
            valence = v;
        }
    }
    if lower.len() - 1 > i + 1 {
        let zeroonetwo = format!("{} {} {}", lower[i], lower[i + 1], lower[i + 2]);
        if let Some(&v) = rules.special.get(zeroonetwo.as_str()) {
            valence = v;
        }
    }
    for gram in [&threetwoone, &threetwo, &twoone] {
        if let Some(&b) = rules.boosters.get(gram.as_str()) {
            valence += b;
        }
    }
    valence
}

/// Reweights around the first "but": halves earlier valences, boosts later
/// ones by half. Positions are located by value lookup, as the reference does,
/// so repeated values are all rewritten at their first occurrence.
fn but_check(lower: &[String], sentiments: &mut [f64]) {
    let Some(bi) = lower.iter().position(|w| w == "but") else {
        return;
    };
    for p in 0..sentiments.len() {
        let s = sentiments[p];
        let si = sentiments
            .iter()
            .position(|&x| x == s)
            .expect("value present");
        if si < bi {
            sentiments[si] = s * 0.5;
        } else if si > bi {
            sentiments[si] = s * 1.5;
        }
    }
}

fn punctuation_emphasis(text: &str) -> f64 {
    let ep = text.matches('!').count().min(4) as f64 * EXCLAMATION_INCR;
    let qm_count = text.matches('?').count();
    let qm = match qm_count {
        0 | 1 => 0.0,
        2 | 3 => qm_count as f64 * QUESTION_INCR,
        _ => QUESTION_CAP,
    };
    ep + qm
}

fn normalize(score: f64) -> f64 {
    (score / (score * score + ALPHA).sqrt()).clamp(-1.0, 1.0)
}
