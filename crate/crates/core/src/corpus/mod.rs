//! Review and complaint-video records: JSON Lines ingestion, validation,
//! complaint filtering and descriptive statistics.

mod kappa;

pub use kappa::{fleiss_kappa, KappaError};

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four coarse product domains of the complaint-video dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    Fashion,
    Electronics,
    Household,
    Others,
}

impl Domain {
    pub const ALL: [Domain; 4] = [
        Domain::Fashion,
        Domain::Electronics,
        Domain::Household,
        Domain::Others,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Fashion => "Fashion",
            Domain::Electronics => "Electronics",
            Domain::Household => "Household",
            Domain::Others => "Others",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Domain::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Emotional state of the complainer, as annotated in the gold data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Dissatisfaction,
    Blame,
    Frustration,
    Disappointment,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [
        Emotion::Dissatisfaction,
        Emotion::Blame,
        Emotion::Frustration,
        Emotion::Disappointment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Dissatisfaction => "dissatisfaction",
            Emotion::Blame => "blame",
            Emotion::Frustration => "frustration",
            Emotion::Disappointment => "disappointment",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// The closed complaint-aspect vocabulary.
pub const ASPECTS: [&str; 8] = [
    "Quality",
    "Functionality",
    "Defective",
    "Design",
    "Missing",
    "Refund",
    "Performance",
    "Delay",
];

/// One product review from the large review corpus backing retrieval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmazonReview {
    pub review_id: String,
    pub rating: u8,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub image_refs: Vec<String>,
    /// Optional product identifier, used to deduplicate retrieved contexts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_id: Option<String>,
}

impl AmazonReview {
    /// Title and body joined as the review's textual content.
    pub fn text(&self) -> String {
        match (self.title.trim(), self.body.trim()) {
            ("", b) => b.to_string(),
            (t, "") => t.to_string(),
            (t, b) => format!("{t} {b}"),
        }
    }
}

/// One annotated complaint video.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComVidRecord {
    pub review_id: String,
    pub rating: u8,
    pub review_text: String,
    pub aspects: Vec<String>,
    pub domain: Domain,
    pub product_name: String,
    pub video_ref: String,
    pub gold_description: String,
    pub emotion: Emotion,
}

/// Wire form of [`ComVidRecord`]; label fields stay strings until validated
/// so errors can name the offending value.
#[derive(Debug, Clone, Deserialize)]
pub struct RawComVidRecord {
    pub review_id: String,
    pub rating: u8,
    pub review_text: String,
    pub aspects: Vec<String>,
    pub domain: String,
    pub product_name: String,
    pub video_ref: String,
    pub gold_description: String,
    pub emotion: String,
}

impl RawComVidRecord {
    /// Checks the closed label sets and converts to a typed record.
    pub fn validate(self, opts: ParseOptions) -> Result<ComVidRecord, String> {
        if self.review_id.trim().is_empty() {
            return Err("empty review_id".into());
        }
        if !(1..=2).contains(&self.rating) {
            return Err(format!("rating {} outside 1..=2", self.rating));
        }
        let emotion: Emotion = self
            .emotion
            .parse()
            .map_err(|e| format!("unknown emotion {e:?}"))?;
        let domain: Domain = self
            .domain
            .parse()
            .map_err(|d| format!("unknown domain {d:?}"))?;
        if self.aspects.is_empty() {
            return Err("aspects must not be empty".into());
        }
        if !opts.allow_unknown_aspects {
            if let Some(bad) = self.aspects.iter().find(|a| !ASPECTS.contains(&a.as_str())) {
                return Err(format!("unknown aspect {bad:?}"));
            }
        }
        Ok(ComVidRecord {
            review_id: self.review_id,
            rating: self.rating,
            review_text: self.review_text,
            aspects: self.aspects,
            domain,
            product_name: self.product_name,
            video_ref: self.video_ref,
            gold_description: self.gold_description,
            emotion,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterCriteria {
    pub max_rating: u8,
    /// Bodies must be strictly longer than this many Unicode scalar values.
    pub min_text_chars: usize,
    pub min_images: usize,
}

impl Default for FilterCriteria {
    fn default() -> Self {
        Self {
            max_rating: 1,
            min_text_chars: 150,
            min_images: 1,
        }
    }
}

impl FilterCriteria {
    pub fn accepts(&self, review: &AmazonReview) -> bool {
        review.rating <= self.max_rating
            && review.body.chars().count() > self.min_text_chars
            && review.image_refs.len() >= self.min_images
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainHistogram {
    pub counts: BTreeMap<Domain, u64>,
    pub total: u64,
}

impl DomainHistogram {
    pub fn count(&self, domain: Domain) -> u64 {
        self.counts.get(&domain).copied().unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed JSON: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("line {line}: duplicate review_id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Parse { line, .. }
            | CorpusError::Validation { line, .. }
            | CorpusError::DuplicateId { line, .. } => Some(*line),
            CorpusError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Admit aspect labels outside [`ASPECTS`].
    pub allow_unknown_aspects: bool,
}

fn validate_review(rev: &AmazonReview) -> Result<(), String> {
    if rev.review_id.trim().is_empty() {
        return Err("empty review_id".into());
    }
    if !(1..=5).contains(&rev.rating) {
        return Err(format!("rating {} outside 1..=5", rev.rating));
    }
    Ok(())
}

fn parse_lines<Raw, T, R, F>(reader: R, mut convert: F) -> Result<Vec<T>, CorpusError>
where
    Raw: for<'de> Deserialize<'de>,
    R: BufRead,
    F: FnMut(Raw) -> Result<(String, T), String>,
{
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Raw = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let (id, item) = convert(raw).map_err(|message| CorpusError::Validation {
            line: line_no,
            message,
        })?;
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { line: line_no, id });
        }
        out.push(item);
    }
    Ok(out)
}

/// Parses complaint-video records from JSON Lines. Blank lines are skipped;
/// errors carry the 1-based line number.
pub fn parse_comvid<R: BufRead>(
    reader: R,
    opts: ParseOptions,
) -> Result<Vec<ComVidRecord>, CorpusError> {
    parse_lines(reader, |raw: RawComVidRecord| {
        raw.validate(opts).map(|r| (r.review_id.clone(), r))
    })
}

/// Parses review-corpus records from JSON Lines.
pub fn parse_reviews<R: BufRead>(reader: R) -> Result<Vec<AmazonReview>, CorpusError> {
    parse_lines(reader, |r: AmazonReview| {
        validate_review(&r)?;
        Ok((r.review_id.clone(), r))
    })
}

/// Writes records as JSON Lines, one object per line, in input order.
pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps reviews that are low-rated, long enough and carry images. Order is
/// preserved.
pub fn filter_complaints<'a, I>(
    reviews: I,
    criteria: &'a FilterCriteria,
) -> impl Iterator<Item = AmazonReview> + 'a
where
    I: IntoIterator<Item = AmazonReview>,
    I::IntoIter: 'a,
{
    reviews.into_iter().filter(move |r| criteria.accepts(r))
}

pub fn domain_stats(records: &[ComVidRecord]) -> DomainHistogram {
    let mut counts: BTreeMap<Domain, u64> = Domain::ALL.iter().map(|d| (*d, 0)).collect();
    for rec in records {
        *counts.entry(rec.domain).or_default() += 1;
    }
    let total = counts.values().sum();
    DomainHistogram { counts, total }
}
