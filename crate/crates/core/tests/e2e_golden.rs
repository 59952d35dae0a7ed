//! The fixture run against frozen outputs. Set `COMVID_UPDATE_GOLDEN=1` to
//! rewrite the golden files after an intended change, then audit the diff.

mod common;

use common::{fixture_dir, run_e2e, E2E_OUTPUTS};

#[test]
fn fixture_run_matches_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    run_e2e(tmp.path(), "2");
    let golden = fixture_dir().join("golden");
    let update = std::env::var_os("COMVID_UPDATE_GOLDEN").is_some();
    if update {
        std::fs::create_dir_all(&golden).unwrap();
    }
    for name in E2E_OUTPUTS {
        let got = std::fs::read_to_string(tmp.path().join(name)).unwrap();
        if update {
            std::fs::write(golden.join(name), &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(golden.join(name)).unwrap();
        assert_eq!(got, want, "{name} differs from golden");
    }
}

#[test]
fn golden_provenance_is_consistent() {
    use comvid::raggen::{replay, Provenance};
    let golden = fixture_dir().join("golden");
    let prov = std::fs::read_to_string(golden.join("provenance.jsonl")).unwrap();
    let generated = std::fs::read_to_string(golden.join("generated.jsonl")).unwrap();
    for (p, g) in prov.lines().zip(generated.lines()) {
        let p: Provenance = serde_json::from_str(p).unwrap();
        let g: comvid::raggen::GeneratedComplaint = serde_json::from_str(g).unwrap();
        assert_eq!(p.review_id, g.review_id);
        assert_eq!(p.k, 3);
        assert_eq!(p.hits.len(), 3);
        assert!(p.hits.windows(2).all(|w| w[0].distance <= w[1].distance));
        assert_eq!(p.keyframes.len(), 4);
        assert!(p.keyframes.windows(2).all(|w| w[0] < w[1]));
        let text = replay(p.prompt.as_ref().unwrap(), &g.prompt_hash).unwrap();
        assert!(text.contains(&format!("User emotional state: {}", p.prompt.as_ref().unwrap().emotion.unwrap().as_str())));
        assert!(p.error.is_none());
    }
}
