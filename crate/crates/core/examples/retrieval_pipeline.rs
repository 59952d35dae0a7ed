//! The retrieval-augmented generation pipeline on the bundled fixture with
//! in-process mock providers.
//!
//! cargo run --example retrieval_pipeline

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use comvid::corpus::{filter_complaints, parse_comvid, parse_reviews, FilterCriteria, ParseOptions};
use comvid::provider::mock::{HashEmbedder, TemplateGenerator};
use comvid::provider::RetryPolicy;
use comvid::raggen::{embed_reviews, replay, Pipeline, PipelineConfig, ReviewMemory};
use comvid::vindex::FlatIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let reviews = parse_reviews(BufReader::new(File::open(fixture.join("reviews.jsonl"))?))?;
    let complaints: Vec<_> = filter_complaints(reviews, &FilterCriteria::default()).collect();
    let records = parse_comvid(BufReader::new(File::open(fixture.join("comvid.jsonl"))?), ParseOptions::default())?;

    let embedder = HashEmbedder::new(64);
    let config = PipelineConfig::default();
    let vectors = embed_reviews(&complaints, &fixture, &embedder, RetryPolicy::none(), config.normalize)?;
    let index = FlatIndex::build(&vectors)?;
    let memory = ReviewMemory::from_reviews(&complaints);
    let pipeline = Pipeline {
        index: &index,
        memory: &memory,
        embedder: &embedder,
        generator: &TemplateGenerator,
        config,
        video_root: fixture.clone(),
    };

    for record in &records {
        let (prov, out) = pipeline.run(record);
        let hits: Vec<&str> = prov.hits.iter().map(|h| h.id.as_str()).collect();
        println!("{} keyframes {:?} hits {:?}", record.review_id, prov.keyframes, hits);
        match out {
            Ok(g) => {
                // the recorded prompt spec reproduces the prompt exactly
                replay(prov.prompt.as_ref().expect("prompt recorded"), &g.prompt_hash)?;
                println!("  {}", g.text);
            }
            Err(e) => println!("  {e}"),
        }
    }

    if let Some((prov, _)) = records.first().map(|r| pipeline.run(r)) {
        println!("\nprompt for {}:\n{}", prov.review_id, prov.prompt.expect("prompt recorded").render()?);
    }
    Ok(())
}
