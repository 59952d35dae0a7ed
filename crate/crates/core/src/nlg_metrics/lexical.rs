//! BLEU, ROUGE and METEOR over case-folded word tokens.

use std::collections::HashMap;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::text::tokenize;

/// Candidate and reference token lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedPair {
    pub candidate: Vec<String>,
    pub reference: Vec<String>,
    pub lowercased: bool,
}

impl TokenizedPair {
    pub fn new(candidate: &str, reference: &str) -> Self {
        Self {
            candidate: tokenize(candidate),
            reference: tokenize(reference),
            lowercased: true,
        }
    }

    pub fn from_tokens(candidate: &[&str], reference: &[&str]) -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            candidate: own(candidate),
            reference: own(reference),
            lowercased: false,
        }
    }
}

/// A metric value plus a flag set when the inputs made it vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalScore {
    pub value: f64,
    pub degenerate: bool,
}

impl LexicalScore {
    fn ok(value: f64) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }

    fn degenerate(value: f64) -> Self {
        Self {
            value,
            degenerate: true,
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches, candidate n-gram total, reference n-gram total.
fn overlap(cand: &[String], reference: &[String], n: usize) -> (usize, usize, usize) {
    let c = ngram_counts(cand, n);
    let r = ngram_counts(reference, n);
    let matched = c
        .iter()
        .map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0)))
        .sum();
    (
        matched,
        cand.len().saturating_sub(n - 1),
        reference.len().saturating_sub(n - 1),
    )
}

/// Cumulative BLEU over orders `1..=n` with uniform weights.
///
/// The brevity penalty is 1 when the candidate is longer than the reference
/// and `exp(1 - r/c)` otherwise. An order for which neither side has any
/// n-gram is vacuous and contributes precision 1, so identical short texts
/// score 1 at every `n`. Any order with zero matches gives 0.
pub fn bleu(pair: &TokenizedPair, n: usize) -> LexicalScore {
    assert!(n >= 1, "BLEU order must be at least 1");
    let (c, r) = (pair.candidate.len(), pair.reference.len());
    if c == 0 {
        return LexicalScore::degenerate(0.0);
    }
    let mut log_sum = 0.0;
    for k in 1..=n {
        let (m, total_c, total_r) = overlap(&pair.candidate, &pair.reference, k);
        if total_c == 0 && total_r == 0 {
            continue;
        }
        if m == 0 {
            return LexicalScore::ok(0.0);
        }
        log_sum += (m as f64 / total_c as f64).ln();
    }
    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    LexicalScore::ok(bp * (log_sum / n as f64).exp())
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// ROUGE-N F1. When neither side has an n-gram the result is flagged
/// degenerate and is 1 for identical token lists, 0 otherwise.
pub fn rouge_n(pair: &TokenizedPair, n: usize) -> LexicalScore {
    assert!(n >= 1, "ROUGE order must be at least 1");
    let (m, tc, tr) = overlap(&pair.candidate, &pair.reference, n);
    if tc == 0 && tr == 0 {
        let same = !pair.candidate.is_empty() && pair.candidate == pair.reference;
        return LexicalScore::degenerate(if same { 1.0 } else { 0.0 });
    }
    if tc == 0 || tr == 0 {
        return LexicalScore::ok(0.0);
    }
    LexicalScore::ok(f1(m as f64 / tc as f64, m as f64 / tr as f64))
}

/// Longest common subsequence length, O(|a|·|b|) time and O(|b|) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F1 from the LCS length.
pub fn rouge_l(pair: &TokenizedPair) -> LexicalScore {
    let (c, r) = (pair.candidate.len(), pair.reference.len());
    if c == 0 && r == 0 {
        return LexicalScore::degenerate(0.0);
    }
    if c == 0 || r == 0 {
        return LexicalScore::ok(0.0);
    }
    let l = lcs_len(&pair.candidate, &pair.reference) as f64;
    LexicalScore::ok(f1(l / c as f64, l / r as f64))
}

/// Groups of interchangeable words for METEOR's synonym stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynonymTable {
    group_of: HashMap<String, Vec<usize>>,
}

impl SynonymTable {
    pub fn from_groups<'a>(groups: impl IntoIterator<Item = &'a [&'a str]>) -> Self {
        let mut group_of: HashMap<String, Vec<usize>> = HashMap::new();
        for (g, words) in groups.into_iter().enumerate() {
            for w in words {
                group_of.entry(w.to_lowercase()).or_default().push(g);
            }
        }
        Self { group_of }
    }

    /// One group per line, words separated by whitespace; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let lines: Vec<Vec<&str>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>())
            .filter(|ws| ws.len() > 1)
            .collect();
        Self::from_groups(lines.iter().map(Vec::as_slice))
    }

    pub fn related(&self, a: &str, b: &str) -> bool {
        match (self.group_of.get(a), self.group_of.get(b)) {
            (Some(ga), Some(gb)) => ga.iter().any(|g| gb.contains(g)),
            _ => false,
        }
    }
}

fn stemmer() -> &'static Stemmer {
    static S: OnceLock<Stemmer> = OnceLock::new();
    S.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Alignment statistics behind a METEOR score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeteorDetail {
    pub matches: usize,
    pub chunks: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_mean: f64,
    pub penalty: f64,
    pub score: f64,
}

/// Word alignment by stages: exact, then stem, then synonyms. Each candidate
/// token takes the reference position right after its predecessor's match
/// when eligible, and otherwise the earliest free eligible position.
/// Returns `align[i] = Some(j)` for matched candidate tokens.
fn align(cand: &[String], reference: &[String], synonyms: Option<&SynonymTable>) -> Vec<Option<usize>> {
    let cs: Vec<String> = cand.iter().map(|t| stemmer().stem(t).into_owned()).collect();
    let rs: Vec<String> = reference.iter().map(|t| stemmer().stem(t).into_owned()).collect();
    let mut align: Vec<Option<usize>> = vec![None; cand.len()];
    let mut used = vec![false; reference.len()];
    let stages: [&dyn Fn(usize, usize) -> bool; 3] = [
        &|i, j| cand[i] == reference[j],
        &|i, j| cs[i] == rs[j],
        &|i, j| synonyms.is_some_and(|s| s.related(&cand[i], &reference[j])),
    ];
    for eligible in stages {
        for i in 0..cand.len() {
            if align[i].is_some() {
                continue;
            }
            let preferred = i
                .checked_sub(1)
                .and_then(|p| align[p])
                .map(|j| j + 1)
                .filter(|&j| j < reference.len() && !used[j] && eligible(i, j));
            let pick = preferred.or_else(|| (0..reference.len()).find(|&j| !used[j] && eligible(i, j)));
            if let Some(j) = pick {
                align[i] = Some(j);
                used[j] = true;
            }
        }
    }
    align
}

/// METEOR with `F_mean = 10PR / (R + 9P)` and a fragmentation penalty of
/// `0.5 · (chunks / matches)^3`. A chunk is a maximal run of candidate tokens
/// aligned to consecutive reference positions.
pub fn meteor_detail(pair: &TokenizedPair, synonyms: Option<&SynonymTable>) -> MeteorDetail {
    let zero = MeteorDetail {
        matches: 0,
        chunks: 0,
        precision: 0.0,
        recall: 0.0,
        f_mean: 0.0,
        penalty: 0.0,
        score: 0.0,
    };
    if pair.candidate.is_empty() || pair.reference.is_empty() {
        return zero;
    }
    let a = align(&pair.candidate, &pair.reference, synonyms);
    let matches = a.iter().flatten().count();
    if matches == 0 {
        return zero;
    }
    let mut chunks = 0;
    let mut prev: Option<usize> = None;
    for slot in &a {
        match (*slot, prev) {
            (Some(j), Some(p)) if j == p + 1 => {}
            (Some(_), _) => chunks += 1,
            (None, _) => {}
        }
        prev = *slot;
    }
    let precision = matches as f64 / pair.candidate.len() as f64;
    let recall = matches as f64 / pair.reference.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (chunks as f64 / matches as f64).powi(3);
    MeteorDetail {
        matches,
        chunks,
        precision,
        recall,
        f_mean,
        penalty,
        score: f_mean * (1.0 - penalty),
    }
}

pub fn meteor(pair: &TokenizedPair, synonyms: Option<&SynonymTable>) -> LexicalScore {
    let d = meteor_detail(pair, synonyms);
    if pair.candidate.is_empty() {
        LexicalScore::degenerate(d.score)
    } else {
        LexicalScore::ok(d.score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(c: &str, r: &str) -> TokenizedPair {
        TokenizedPair::new(c, r)
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        let p = pair("the mouse broke today", "the mouse broke today");
        for n in 1..=4 {
            assert_eq!(bleu(&p, n).value, 1.0);
        }
        let short = pair("mouse broke", "mouse broke");
        assert_eq!(bleu(&short, 4).value, 1.0);
        assert_eq!(bleu(&pair("a b", "c d"), 1).value, 0.0);
    }

    #[test]
    fn bleu_clipping_and_brevity() {
        // clipped unigram precision 1/3; the candidate is longer, so no penalty
        assert!((bleu(&pair("the the the", "the cat"), 1).value - 1.0 / 3.0).abs() < 1e-15);
        // 2 of 2 unigrams match, reference is longer: BP = exp(1 - 4/2)
        let v = bleu(&pair("the cat", "the cat sat down"), 1).value;
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bleu_empty_candidate_is_flagged() {
        let s = bleu(&pair("", "the cat"), 2);
        assert_eq!(s, LexicalScore { value: 0.0, degenerate: true });
    }

    #[test]
    fn rouge_examples() {
        let p = pair("a b c d", "a c b d");
        assert_eq!(lcs_len(&p.candidate, &p.reference), 3);
        assert_eq!(rouge_l(&p).value, 0.75);
        assert_eq!(rouge_n(&pair("x y", "x y"), 1).value, 1.0);
        assert_eq!(rouge_n(&pair("x y", "z w"), 2).value, 0.0);
        assert_eq!(rouge_l(&pair("", "")), LexicalScore { value: 0.0, degenerate: true });
        let single = rouge_n(&pair("x", "x"), 2);
        assert_eq!(single, LexicalScore { value: 1.0, degenerate: true });
    }

    #[test]
    fn meteor_closed_forms() {
        let d = meteor_detail(&pair("a b c d e", "a b c d e"), None);
        assert_eq!((d.matches, d.chunks), (5, 1));
        assert!((d.score - (1.0 - 0.5 / 125.0)).abs() < 1e-15);

        let d = meteor_detail(&pair("the cat sat", "the cat sat down"), None);
        let (p, r) = (1.0, 0.75);
        let f = 10.0 * p * r / (r + 9.0 * p);
        assert_eq!((d.matches, d.chunks), (3, 1));
        assert!((d.score - f * (1.0 - 0.5 / 27.0)).abs() < 1e-15);

        assert_eq!(meteor(&pair("x y", "z w"), None).value, 0.0);
    }

    #[test]
    fn meteor_stem_and_synonym_stages() {
        let d = meteor_detail(&pair("keys broken", "key broken"), None);
        assert_eq!(d.matches, 2);
        let syn = SynonymTable::parse("broken faulty\n# comment\n");
        let d0 = meteor_detail(&pair("faulty mouse", "broken mouse"), None);
        let d1 = meteor_detail(&pair("faulty mouse", "broken mouse"), Some(&syn));
        assert_eq!((d0.matches, d1.matches), (1, 2));
        assert_eq!(d1.chunks, 1);
    }

    #[test]
    fn meteor_prefers_adjacent_position() {
        // the second "the" should continue the chunk after "cat"
        let p = pair("the cat the dog", "the cat the dog");
        let d = meteor_detail(&p, None);
        assert_eq!((d.matches, d.chunks), (4, 1));
    }

    proptest! {
        #[test]
        fn relabeling_invariance(c in prop::collection::vec(0u8..5, 0..10), r in prop::collection::vec(0u8..5, 0..10), shift in 1u8..5) {
            let name = |xs: &[u8], s: u8| xs.iter().map(|x| format!("w{}", (x + s) % 5)).collect::<Vec<_>>();
            let a = TokenizedPair { candidate: name(&c, 0), reference: name(&r, 0), lowercased: true };
            let b = TokenizedPair { candidate: name(&c, shift), reference: name(&r, shift), lowercased: true };
            for n in 1..=4 {
                prop_assert_eq!(bleu(&a, n), bleu(&b, n));
                prop_assert_eq!(rouge_n(&a, n), rouge_n(&b, n));
            }
            prop_assert_eq!(rouge_l(&a), rouge_l(&b));
        }

        #[test]
        fn scores_are_bounded(c in prop::collection::vec(0u8..6, 1..12), r in prop::collection::vec(0u8..6, 1..12)) {
            let name = |xs: &[u8]| xs.iter().map(|x| format!("t{x}")).collect::<Vec<_>>();
            let p = TokenizedPair { candidate: name(&c), reference: name(&r), lowercased: true };
            for v in [bleu(&p, 4).value, rouge_n(&p, 2).value, rouge_l(&p).value, meteor(&p, None).value] {
                prop_assert!((0.0..=1.0).contains(&v), "{}", v);
            }
        }
    }
}
