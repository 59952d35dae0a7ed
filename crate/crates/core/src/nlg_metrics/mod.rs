//! Standard generation metrics and the per-sample report row.

pub mod embedding;
pub mod lexical;
pub mod readability;
pub mod report;
pub mod transport;

use serde::{Deserialize, Serialize};

use crate::complaint_metrics::{
    score_complaint, AspectJudge, AspectVerdict, CRBreakdown, EmotionLexicon, SentimentLexicon,
};
use crate::corpus::ComVidRecord;
use crate::provider::{Embedder, ProviderError, RetryPolicy, TokenScorer};

pub use embedding::{bertscore, moverscore, BertScore, BertScoreOptions, MoverScore};
pub use lexical::{bleu, meteor, rouge_l, rouge_n, LexicalScore, SynonymTable, TokenizedPair};
pub use readability::{coleman_liau, flesch_reading_ease};

/// Report columns in output order.
pub const COLUMNS: [&str; 14] = [
    "R1", "R2", "RL", "B1", "B2", "BL", "BS", "FRES", "CLRS", "PS", "MeS", "MoS", "VS", "CR",
];

/// `exp(-mean(logprobs))`, or `None` for an empty list. The log-probs are
/// summed in sorted order so the result depends only on their multiset.
pub fn perplexity_from_logprobs(logprobs: &[f64]) -> Option<f64> {
    if logprobs.is_empty() {
        return None;
    }
    let mut xs = logprobs.to_vec();
    xs.sort_by(f64::total_cmp);
    let sum: f64 = xs.iter().sum();
    Some((-sum / xs.len() as f64).exp())
}

pub fn perplexity(text: &str, scorer: &dyn TokenScorer, retry: RetryPolicy) -> Result<Option<f64>, ProviderError> {
    let r = retry.run(|| scorer.score_tokens(text))?.value;
    if r.tokens.len() != r.logprobs.len() {
        return Err(ProviderError::Protocol("tokens and logprobs differ in length".into()));
    }
    Ok(perplexity_from_logprobs(&r.logprobs))
}

/// One report value, or the reason it is absent.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(f64),
    Skipped(String),
}

impl Cell {
    pub fn skipped(reason: impl Into<String>) -> Self {
        // markers end up in TSV and Markdown cells
        let r: String = reason
            .into()
            .chars()
            .map(|c| if c == '\t' || c == '|' || c == '\n' { ' ' } else { c })
            .collect();
        Cell::Skipped(r)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Skipped(_) => None,
        }
    }

    fn from_option(v: Option<f64>, reason: &str) -> Self {
        match v {
            Some(x) if x.is_finite() => Cell::Value(x),
            Some(_) => Cell::skipped("non-finite"),
            None => Cell::skipped(reason),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Value(v) => s.serialize_f64(*v),
            Cell::Skipped(r) => s.serialize_str(&format!("skipped:{r}")),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Cell::Value(v)),
            Repr::Text(t) => t
                .strip_prefix("skipped:")
                .map(|r| Cell::Skipped(r.to_string()))
                .ok_or_else(|| serde::de::Error::custom(format!("bad cell {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub r1: Cell,
    pub r2: Cell,
    pub rl: Cell,
    pub b1: Cell,
    pub b2: Cell,
    pub bl: Cell,
    pub bs: Cell,
    pub fres: Cell,
    pub clrs: Cell,
    pub ps: Cell,
    pub mes: Cell,
    pub mos: Cell,
    pub vs: Cell,
    pub cr: Cell,
}

impl MetricReport {
    /// Cells in [`COLUMNS`] order.
    pub fn cells(&self) -> [&Cell; 14] {
        [
            &self.r1, &self.r2, &self.rl, &self.b1, &self.b2, &self.bl, &self.bs, &self.fres,
            &self.clrs, &self.ps, &self.mes, &self.mos, &self.vs, &self.cr,
        ]
    }

    pub fn from_cells(c: [Cell; 14]) -> Self {
        let [r1, r2, rl, b1, b2, bl, bs, fres, clrs, ps, mes, mos, vs, cr] = c;
        Self {
            r1,
            r2,
            rl,
            b1,
            b2,
            bl,
            bs,
            fres,
            clrs,
            ps,
            mes,
            mos,
            vs,
            cr,
        }
    }

    /// Column-wise mean over samples, in input order. A column is skipped
    /// if any sample skipped it, with that sample's reason.
    pub fn mean(reports: &[MetricReport]) -> Option<MetricReport> {
        if reports.is_empty() {
            return None;
        }
        let cells = std::array::from_fn(|k| {
            let mut sum = 0.0;
            for r in reports {
                match r.cells()[k] {
                    Cell::Value(v) => sum += v,
                    Cell::Skipped(reason) => return Cell::Skipped(reason.clone()),
                }
            }
            Cell::Value(sum / reports.len() as f64)
        });
        Some(Self::from_cells(cells))
    }
}

/// Scores for one generated text, plus the inputs behind its CR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEvaluation {
    pub review_id: String,
    pub metrics: MetricReport,
    /// Columns whose value came from vacuous inputs.
    pub degenerate: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cr_breakdown: Option<CRBreakdown>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aspects: Vec<AspectVerdict>,
}

/// Metric configuration. Provider-backed columns without a provider are
/// reported as skipped.
pub struct Evaluator<'a> {
    pub embedder: Option<&'a dyn Embedder>,
    pub scorer: Option<&'a dyn TokenScorer>,
    pub aspect_judge: AspectJudge<'a>,
    pub sentiment: &'a SentimentLexicon,
    pub emotions: &'a EmotionLexicon,
    pub synonyms: Option<&'a SynonymTable>,
    pub bert: BertScoreOptions,
    pub retry: RetryPolicy,
}

impl<'a> Evaluator<'a> {
    /// Lexical-only configuration with the bundled lexicons.
    pub fn offline(aspect_judge: AspectJudge<'a>) -> Self {
        Self {
            embedder: None,
            scorer: None,
            aspect_judge,
            sentiment: SentimentLexicon::bundled(),
            emotions: EmotionLexicon::bundled(),
            synonyms: None,
            bert: BertScoreOptions::default(),
            retry: RetryPolicy::default(),
        }
    }

    /// Scores `generated` against the gold description and aspects. Never
    /// fails as a whole; a metric that errors is recorded as skipped.
    pub fn evaluate_sample(&self, generated: &str, gold: &ComVidRecord) -> SampleEvaluation {
        let pair = TokenizedPair::new(generated, &gold.gold_description);
        let mut degenerate = Vec::new();
        let mut lex = |name: &str, s: LexicalScore| {
            if s.degenerate {
                degenerate.push(name.to_string());
            }
            Cell::Value(s.value)
        };
        let r1 = lex("R1", rouge_n(&pair, 1));
        let r2 = lex("R2", rouge_n(&pair, 2));
        let rl = lex("RL", rouge_l(&pair));
        let b1 = lex("B1", bleu(&pair, 1));
        let b2 = lex("B2", bleu(&pair, 2));
        let bl = lex("BL", bleu(&pair, 4));
        let mes = lex("MeS", meteor(&pair, self.synonyms));

        let (bs, mos) = match self.embedder {
            None => (Cell::skipped("no-embedder"), Cell::skipped("no-embedder")),
            Some(e) => {
                let bs = match bertscore(&pair, e, &self.bert, self.retry) {
                    Ok(s) => {
                        if s.degenerate {
                            degenerate.push("BS".into());
                        }
                        Cell::Value(s.f1)
                    }
                    Err(err) => Cell::skipped(format!("error: {err}")),
                };
                let mos = match moverscore(&pair, e, self.bert.idf.as_ref(), self.retry) {
                    Ok(s) => {
                        if s.degenerate {
                            degenerate.push("MoS".into());
                        }
                        Cell::Value(s.score)
                    }
                    Err(err) => Cell::skipped(format!("error: {err}")),
                };
                (bs, mos)
            }
        };

        let counts = readability::text_counts(generated);
        let fres = Cell::from_option(readability::fres_from_counts(counts), "no-words");
        let clrs = Cell::from_option(readability::coleman_liau_from_counts(counts), "no-words");
        let ps = match self.scorer {
            None => Cell::skipped("no-scorer"),
            Some(s) => match perplexity(generated, s, self.retry) {
                Ok(v) => Cell::from_option(v, "no-tokens"),
                Err(err) => Cell::skipped(format!("error: {err}")),
            },
        };

        let (vs, cr, cr_breakdown, aspects) =
            match score_complaint(generated, &gold.aspects, self.sentiment, self.emotions, self.aspect_judge) {
                Ok(s) => (
                    Cell::Value(s.sentiment.compound_mean()),
                    Cell::Value(s.cr.cr),
                    Some(s.cr),
                    s.aspects,
                ),
                Err(err) => {
                    let vs = crate::complaint_metrics::sample_sentiment(generated, self.sentiment).compound_mean();
                    (Cell::Value(vs), Cell::skipped(format!("error: {err}")), None, Vec::new())
                }
            };

        SampleEvaluation {
            review_id: gold.review_id.clone(),
            metrics: MetricReport {
                r1,
                r2,
                rl,
                b1,
                b2,
                bl,
                bs,
                fres,
                clrs,
                ps,
                mes,
                mos,
                vs,
                cr,
            },
            degenerate,
            cr_breakdown,
            aspects,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complaint_metrics::AspectLexicon;
    use crate::corpus::{Domain, Emotion};
    use crate::provider::mock::{HashEmbedder, HashScorer, ScriptedScorer};
    use crate::provider::ScoreTokensResponse;

    fn gold(desc: &str) -> ComVidRecord {
        ComVidRecord {
            review_id: "r1".into(),
            rating: 1,
            review_text: "x".into(),
            aspects: vec!["Defective".into()],
            domain: Domain::Electronics,
            product_name: "mouse".into(),
            video_ref: "v".into(),
            gold_description: desc.into(),
            emotion: Emotion::Frustration,
        }
    }

    #[test]
    fn perplexity_closed_forms() {
        assert_eq!(perplexity_from_logprobs(&[0.0; 3]), Some(1.0));
        let half = 0.5f64.ln();
        assert!((perplexity_from_logprobs(&[half; 4]).unwrap() - 2.0).abs() < 1e-12);
        let mixed = [0.5f64.ln(), 0.25f64.ln(), 1.0f64.ln()];
        let want = (-(mixed.iter().sum::<f64>()) / 3.0).exp();
        assert!((perplexity_from_logprobs(&mixed).unwrap() - want).abs() < 1e-12);
        assert_eq!(perplexity_from_logprobs(&[]), None);
        let s = ScriptedScorer(ScoreTokensResponse {
            tokens: vec!["a".into(), "b".into()],
            logprobs: vec![half, half],
        });
        assert!((perplexity("a b", &s, RetryPolicy::none()).unwrap().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn perplexity_ignores_order() {
        let xs = [-0.1, -3.7, -0.000001, -12.5, -1.0 / 3.0];
        let mut ys = xs;
        ys.reverse();
        assert_eq!(perplexity_from_logprobs(&xs), perplexity_from_logprobs(&ys));
    }

    #[test]
    fn identity_row() {
        let emb = HashEmbedder::new(32);
        let mut ev = Evaluator::offline(AspectJudge::Lexical(AspectLexicon::builtin()));
        ev.embedder = Some(&emb);
        ev.scorer = Some(&HashScorer);
        let text = "The user wants to convey that the mouse is defective.";
        let s = ev.evaluate_sample(text, &gold(text));
        for c in [&s.metrics.r1, &s.metrics.r2, &s.metrics.rl, &s.metrics.b1, &s.metrics.b2, &s.metrics.bl, &s.metrics.bs] {
            assert_eq!(c, &Cell::Value(1.0));
        }
        assert_eq!(s.metrics.mos, Cell::Value(1.0));
        assert!(s.degenerate.is_empty());
    }

    #[test]
    fn disabled_providers_are_skipped() {
        let ev = Evaluator::offline(AspectJudge::Lexical(AspectLexicon::builtin()));
        let s = ev.evaluate_sample("broken mouse", &gold("the mouse is broken"));
        assert_eq!(s.metrics.bs, Cell::Skipped("no-embedder".into()));
        assert_eq!(s.metrics.ps, Cell::Skipped("no-scorer".into()));
        assert_eq!(serde_json::to_value(&s.metrics.mos).unwrap(), "skipped:no-embedder");
    }

    #[test]
    fn empty_generation_is_degenerate_not_fatal() {
        let ev = Evaluator::offline(AspectJudge::Lexical(AspectLexicon::builtin()));
        let s = ev.evaluate_sample("", &gold("the mouse is broken"));
        assert_eq!(s.metrics.r1, Cell::Value(0.0));
        assert!(s.degenerate.contains(&"B1".to_string()));
        assert_eq!(s.metrics.fres, Cell::Skipped("no-words".into()));
        let cr = s.cr_breakdown.unwrap();
        assert_eq!((cr.s_nvader, cr.es, cr.aspect_score), (0.5, 0.0, 0.0));
    }

    #[test]
    fn cell_json_round_trip() {
        for c in [Cell::Value(0.25), Cell::Skipped("no-scorer".into())] {
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(serde_json::from_str::<Cell>(&j).unwrap(), c);
        }
    }

    #[test]
    fn mean_skips_propagate() {
        let a = MetricReport::from_cells(std::array::from_fn(|k| Cell::Value(k as f64)));
        let mut b = a.clone();
        b.ps = Cell::skipped("no-tokens");
        let m = MetricReport::mean(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(m, a);
        let m = MetricReport::mean(&[a, b]).unwrap();
        assert_eq!(m.ps, Cell::Skipped("no-tokens".into()));
        assert_eq!(m.cr, Cell::Value(13.0));
    }
}
