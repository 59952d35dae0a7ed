//! Ingest: parse the review corpus, keep complaint candidates, and summarize
//! the annotated video records.
//!
//! cargo run --example filter_reviews

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use comvid::corpus::{domain_stats, filter_complaints, parse_comvid, parse_reviews, FilterCriteria, ParseOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");

    let reviews = parse_reviews(BufReader::new(File::open(fixture.join("reviews.jsonl"))?))?;
    let criteria = FilterCriteria::default();
    println!(
        "{} reviews; keeping rating <= {}, body > {} chars, >= {} image(s)",
        reviews.len(),
        criteria.max_rating,
        criteria.min_text_chars,
        criteria.min_images
    );
    for r in filter_complaints(reviews, &criteria) {
        println!("  kept {} ({} chars, {} images)", r.review_id, r.body.chars().count(), r.image_refs.len());
    }

    let records = parse_comvid(BufReader::new(File::open(fixture.join("comvid.jsonl"))?), ParseOptions::default())?;
    let stats = domain_stats(&records);
    println!("{} video records", stats.total);
    for (domain, n) in &stats.counts {
        println!("  {:<28} {n}", domain.as_str());
    }
    Ok(())
}
