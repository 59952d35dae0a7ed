//! Offline text-quality evaluation of generated descriptions against the
//! fixture's gold descriptions, rendered as a report table.
//!
//! cargo run --example nlg_report

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use comvid::complaint_metrics::{AspectJudge, AspectLexicon};
use comvid::corpus::{parse_comvid, ParseOptions};
use comvid::nlg_metrics::report::{render_markdown, ReportRow};
use comvid::nlg_metrics::{Evaluator, MetricReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let records = parse_comvid(BufReader::new(File::open(fixture.join("comvid.jsonl"))?), ParseOptions::default())?;
    // no embedder or scorer: BS, MoS and PS are reported as skipped
    let eval = Evaluator::offline(AspectJudge::Lexical(AspectLexicon::builtin()));

    let mut rows = Vec::new();
    for (setting, make) in [
        ("Gold", (|r: &comvid::corpus::ComVidRecord| r.gold_description.clone()) as fn(&_) -> String),
        ("Review", |r| r.review_text.clone()),
        ("Generic", |r| format!("The user wants to convey a problem with the {}.", r.product_name)),
    ] {
        let reports: Vec<MetricReport> = records.iter().map(|r| eval.evaluate_sample(&make(r), r).metrics).collect();
        rows.push(ReportRow {
            setting: setting.into(),
            model: "baseline".into(),
            metrics: MetricReport::mean(&reports).expect("non-empty fixture"),
        });
    }
    print!("{}", render_markdown(&rows));
    Ok(())
}
