#![allow(dead_code)]

pub mod vader;

use std::path::{Path, PathBuf};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI in-process.
pub fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("comvid").chain(args.iter().copied()).collect();
    let code = comvid::cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn ok(args: &[&str]) -> Run {
    let r = cli(args);
    assert_eq!(r.code, 0, "comvid {args:?} failed: {}", r.stderr);
    r
}

/// Files compared by the determinism and golden checks.
pub const E2E_OUTPUTS: [&str; 9] = [
    "comvid.jsonl",
    "complaints.jsonl",
    "retrieval.jsonl",
    "generated.jsonl",
    "provenance.jsonl",
    "eval.jsonl",
    "summary.json",
    "report.tsv",
    "report.md",
];

/// ingest, index build, retrieve, generate and eval on the fixture with the
/// in-process mocks.
pub fn run_e2e(out: &Path, jobs: &str) {
    let fx = fixture_dir();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let comvid = s(&fx.join("comvid.jsonl"));
    let reviews = s(&fx.join("reviews.jsonl"));
    let out_s = s(out);
    let complaints = s(&out.join("complaints.jsonl"));
    let common = ["--out", out_s.as_str(), "--provider", "mock", "--jobs", jobs];
    let with = |args: &[&str]| {
        let mut v: Vec<&str> = args.to_vec();
        v.extend(common);
        ok(&v);
    };
    with(&["ingest", "--comvid", &comvid, "--reviews", &reviews]);
    with(&["index", "build", "--reviews", &complaints, "--image-root", &s(&fx)]);
    with(&["retrieve", "--comvid", &comvid, "--reviews", &complaints]);
    with(&["generate", "--comvid", &comvid, "--reviews", &complaints]);
    with(&["eval", "--comvid", &comvid]);
}
