//! Index persistence at realistic sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use comvid::fusion::{EmbeddingRecord, Vector};
use comvid::vindex::FlatIndex;

fn random_records(n: usize, dim: usize, seed: u64) -> Vec<EmbeddingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| EmbeddingRecord {
            id: format!("r{i:05}"),
            vector: Vector::new((0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect()).unwrap(),
        })
        .collect()
}

#[test]
fn ten_thousand_rows_survive_save_and_load() {
    let records = random_records(10_000, 64, 1);
    let index = FlatIndex::build(&records).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.fidx");
    index.save(&path).unwrap();
    let back = FlatIndex::load(&path).unwrap();
    assert_eq!((back.len(), back.dim()), (10_000, 64));
    assert_eq!(back, index);
    let q = &records[4321].vector;
    assert_eq!(back.query(q, 1).unwrap()[0].id, "r04321");
}

#[test]
fn rewrite_is_byte_identical() {
    let index = FlatIndex::build(&random_records(1000, 512, 2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("a.fidx"), dir.path().join("b.fidx"));
    index.save(&first).unwrap();
    FlatIndex::load(&first).unwrap().save(&second).unwrap();
    let digest = |p: &std::path::Path| hex::encode(Sha256::digest(std::fs::read(p).unwrap()));
    assert_eq!(digest(&first), digest(&second));
}
