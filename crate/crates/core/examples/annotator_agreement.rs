//! Inter-annotator agreement on emotion labels with Fleiss' kappa.
//!
//! cargo run --example annotator_agreement

use comvid::corpus::{fleiss_kappa, Emotion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // three annotators label five videos
    let labels = [
        ["frustration", "frustration", "frustration"],
        ["disappointment", "frustration", "disappointment"],
        ["blame", "blame", "blame"],
        ["dissatisfaction", "dissatisfaction", "blame"],
        ["disappointment", "disappointment", "disappointment"],
    ];
    let table: Vec<Vec<u32>> = labels
        .iter()
        .map(|row| {
            let mut counts = vec![0u32; Emotion::ALL.len()];
            for l in row {
                let e: Emotion = l.parse().expect("known emotion");
                counts[Emotion::ALL.iter().position(|x| *x == e).unwrap()] += 1;
            }
            counts
        })
        .collect();
    match fleiss_kappa(&table)? {
        Some(k) => println!("kappa over {} items: {k:.4}", table.len()),
        None => println!("kappa undefined: every rating fell in one category"),
    }
    Ok(())
}
