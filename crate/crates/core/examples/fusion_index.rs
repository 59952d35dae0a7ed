//! Fusion and exact search: fuse review vectors, blend a video query with its
//! text cue, and query a flat index that survives a save/load round trip.
//!
//! cargo run --example fusion_index

use comvid::fusion::{blend_query, fuse_review, l2_normalize, select_keyframes, video_query, EmbeddingRecord, Vector, KEYFRAME_COUNT};
use comvid::provider::mock::HashEmbedder;
use comvid::vindex::FlatIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let emb = HashEmbedder::new(16);
    let v = |xs: Vec<f32>| Vector::new(xs);

    let reviews = [
        ("r1", "scroll wheel broke after two days", &[b"wheel photo".as_slice()][..]),
        ("r2", "headphones crackle in the left ear", &[b"ear cup".as_slice(), b"cable".as_slice()][..]),
        ("r3", "bag strap tore on the first trip", &[][..]),
    ];
    let mut records = Vec::new();
    for (id, text, images) in reviews {
        let t = v(emb.text_vector(text))?;
        let imgs = images.iter().map(|b| v(emb.image_vector(b))).collect::<Result<Vec<_>, _>>()?;
        let fused = if imgs.is_empty() { t } else { fuse_review(&t, &imgs)? };
        records.push(EmbeddingRecord {
            id: id.into(),
            vector: l2_normalize(&fused)?,
        });
    }
    let index = FlatIndex::build(&records)?;

    // eight frames of a video; keyframes are picked before pooling
    let frames = (0..8)
        .map(|i| v(emb.image_vector(format!("frame {i}").as_bytes())))
        .collect::<Result<Vec<_>, _>>()?;
    let keyframes = select_keyframes(&frames, KEYFRAME_COUNT)?;
    let picked: Vec<Vector> = keyframes.iter().map(|&i| frames[i].clone()).collect();
    let q_video = video_query(&picked)?;
    let e_text = v(emb.text_vector("Quality, Durability"))?;
    println!("keyframes {keyframes:?}");

    for alpha in [0.0, 0.5, 1.0] {
        let q = blend_query(&q_video, &e_text, alpha)?;
        let hits = index.query(&q.q, 2)?;
        let shown: Vec<String> = hits.iter().map(|h| format!("{} ({:.4})", h.id, h.distance)).collect();
        println!("alpha {alpha:.1}: {}", shown.join(", "));
    }

    let dir = std::env::temp_dir().join("comvid-fusion-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("reviews.fidx");
    index.save(&path)?;
    assert_eq!(FlatIndex::load(&path)?, index);
    println!("index saved to {} and reloaded intact", path.display());
    Ok(())
}
