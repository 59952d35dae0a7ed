//! Complaint retention for a few candidate descriptions: sentiment, emotion
//! and aspect coverage folded into one score.
//!
//! cargo run --example complaint_metrics

use comvid::complaint_metrics::{score_complaint, AspectJudge, AspectLexicon, EmotionLexicon, SentimentLexicon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let aspects = vec!["Quality".to_string(), "Refund".to_string()];
    let candidates = [
        "The user wants to convey that the keyboard is terrible quality and they are furious that no refund was given.",
        "The user wants to convey that the keyboard arrived.",
        "The user wants to convey that the keyboard is great.",
    ];
    let judge = AspectJudge::Lexical(AspectLexicon::builtin());
    println!("{:<6} {:>8} {:>8} {:>8} {:>8}", "text", "S_nvad", "ES", "AS", "CR");
    for (i, text) in candidates.iter().enumerate() {
        let s = score_complaint(text, &aspects, SentimentLexicon::bundled(), EmotionLexicon::bundled(), judge)?;
        println!(
            "{:<6} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            format!("#{}", i + 1),
            s.cr.s_nvader,
            s.cr.es,
            s.cr.aspect_score,
            s.cr.cr
        );
    }
    Ok(())
}
