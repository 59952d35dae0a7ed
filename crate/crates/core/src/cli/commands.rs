use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{JudgeKind, ProviderKind, RunConfig};
use super::{Cli, CliError, Command, Exit, GlobalArgs, IndexCommand, RetrievalArgs};
use crate::complaint_metrics::{AspectJudge, AspectLexicon, EmotionLexicon, SentimentLexicon};
use crate::corpus::{
    domain_stats, filter_complaints, parse_comvid, parse_reviews, write_jsonl, AmazonReview, ComVidRecord, CorpusError,
    Emotion, FilterCriteria, ParseOptions,
};
use crate::fusion::cvec;
use crate::nlg_metrics::report::{render_markdown, render_tsv, ReportRow};
use crate::nlg_metrics::{Cell, Evaluator, MetricReport, SampleEvaluation, SynonymTable};
use crate::provider::mock::{HashEmbedder, HashScorer, KeywordClassifier, TemplateGenerator};
use crate::provider::{Classifier, Embedder, Generator, HttpProvider, ProviderError, RetryPolicy, TokenScorer};
use crate::raggen::{
    embed_reviews, run_all, GeneratedComplaint, MemoryError, Pipeline, PipelineConfig, ReviewMemory, Stage, StageError,
};
use crate::vindex::{FlatIndex, IndexError, SearchHit};

pub(super) fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.global.config {
        Some(p) => {
            require_file(p)?;
            RunConfig::load(p)?
        }
        None => RunConfig::default(),
    };
    apply_global(&mut cfg, &cli.global)?;
    match cli.command {
        Command::Ingest(a) => {
            cfg.paths.comvid = a.comvid.or(cfg.paths.comvid);
            cfg.paths.reviews = a.reviews.or(cfg.paths.reviews);
            let mut criteria = FilterCriteria::default();
            criteria.max_rating = a.max_rating.unwrap_or(criteria.max_rating);
            criteria.min_text_chars = a.min_body_chars.unwrap_or(criteria.min_text_chars);
            criteria.min_images = a.min_images.unwrap_or(criteria.min_images);
            prepare(&cfg, "ingest")?;
            ingest(&cfg, a.allow_unknown_aspects, &criteria, out)
        }
        Command::Index(IndexCommand::Build(a)) => {
            cfg.paths.vectors = a.vectors.or(cfg.paths.vectors);
            cfg.paths.reviews = a.reviews.or(cfg.paths.reviews);
            cfg.paths.image_root = a.image_root.or(cfg.paths.image_root);
            cfg.paths.index = a.index.or(cfg.paths.index);
            prepare(&cfg, "index-build")?;
            index_build(&cfg, out)
        }
        Command::Index(IndexCommand::Query(a)) => {
            cfg.paths.index = a.index.or(cfg.paths.index);
            if let Some(k) = a.k {
                cfg.retrieval.k = k;
            }
            prepare(&cfg, "index-query")?;
            index_query(&cfg, &a.queries, out)
        }
        Command::Retrieve(a) => {
            apply_retrieval(&mut cfg, a.retrieval);
            prepare(&cfg, "retrieve")?;
            retrieve(&cfg, out)
        }
        Command::Generate(a) => {
            apply_retrieval(&mut cfg, a.retrieval);
            cfg.retrieval.include_emotion &= !a.no_emotion;
            cfg.retrieval.dedup_by_product |= a.dedup_by_product;
            if let Some(m) = a.max_tokens {
                cfg.generation.max_tokens = m;
            }
            prepare(&cfg, "generate")?;
            generate(&cfg, a.resume, out)
        }
        Command::Eval(a) => {
            cfg.paths.comvid = a.comvid.or(cfg.paths.comvid);
            if let Some(s) = a.setting {
                cfg.metrics.setting = s;
            }
            if let Some(j) = a.aspect_judge {
                cfg.metrics.aspect_judge = match j.as_str() {
                    "lexical" => JudgeKind::Lexical,
                    "llm" => JudgeKind::Llm,
                    other => return Err(usage(format!("unknown aspect judge {other:?}; expected lexical or llm"))),
                };
            }
            cfg.metrics.bertscore &= !a.no_bertscore;
            cfg.metrics.moverscore &= !a.no_moverscore;
            cfg.metrics.perplexity &= !a.no_perplexity;
            prepare(&cfg, "eval")?;
            let generated = a.generated.unwrap_or_else(|| cfg.paths.output_dir.join("generated.jsonl"));
            eval(&cfg, &generated, out)
        }
        Command::Report(a) => {
            prepare(&cfg, "report")?;
            report(&cfg, &a.summaries, out)
        }
    }
}

fn usage(message: String) -> CliError {
    CliError {
        exit: Exit::Usage,
        message,
    }
}

fn apply_global(cfg: &mut RunConfig, g: &GlobalArgs) -> Result<(), CliError> {
    if let Some(o) = &g.out {
        cfg.paths.output_dir = o.clone();
    }
    if let Some(spec) = &g.provider {
        match spec.as_str() {
            "none" => cfg.provider.kind = ProviderKind::None,
            "mock" => cfg.provider.kind = ProviderKind::Mock,
            url if url.starts_with("http://") || url.starts_with("https://") => {
                cfg.provider.kind = ProviderKind::Http;
                cfg.provider.base_url = Some(url.to_string());
            }
            other => return Err(usage(format!("--provider {other:?}: expected none, mock or an http(s) URL"))),
        }
    }
    if let Some(v) = &g.auth_token_env {
        cfg.provider.auth_token_env = Some(v.clone());
    }
    if let Some(v) = g.timeout_ms {
        cfg.provider.timeout_ms = v;
    }
    if let Some(v) = g.max_retries {
        cfg.provider.max_retries = v;
    }
    if let Some(v) = g.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    Ok(())
}

fn apply_retrieval(cfg: &mut RunConfig, a: RetrievalArgs) {
    cfg.paths.comvid = a.comvid.or(cfg.paths.comvid.take());
    cfg.paths.reviews = a.reviews.or(cfg.paths.reviews.take());
    cfg.paths.index = a.index.or(cfg.paths.index.take());
    cfg.paths.video_root = a.video_root.or(cfg.paths.video_root.take());
    if let Some(v) = a.alpha {
        cfg.retrieval.alpha = v;
    }
    if let Some(v) = a.k {
        cfg.retrieval.k = v;
    }
    cfg.retrieval.normalize &= !a.no_normalize;
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    command: &'a str,
    config: &'a RunConfig,
}

/// Validates the effective configuration, creates the output directory and
/// echoes the configuration into it.
fn prepare(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    cfg.validate()?;
    let dir = &cfg.paths.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
    let mut text = serde_json::to_string_pretty(&ConfigEcho { command, config: cfg }).map_err(internal)?;
    text.push('\n');
    write_file(&dir.join(format!("run_config.{command}.json")), text.as_bytes())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::internal(e.to_string())
}

fn require_file(p: &Path) -> Result<(), CliError> {
    if p.exists() {
        Ok(())
    } else {
        Err(CliError::validation(format!("no such file: {}", p.display())))
    }
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    let p = p
        .as_deref()
        .ok_or_else(|| CliError::validation(format!("missing --{flag} (or paths.{} in the config)", flag.replace('-', "_"))))?;
    require_file(p)?;
    Ok(p)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
}

fn write_jsonl_file<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    write_jsonl(&mut w, items).and_then(|_| w.flush()).map_err(internal)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(internal)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

fn corpus_err(path: &Path, e: CorpusError) -> CliError {
    CliError::validation(format!("{}: {e}", path.display()))
}

fn load_comvid(cfg: &RunConfig, allow_unknown_aspects: bool) -> Result<(PathBuf, Vec<ComVidRecord>), CliError> {
    let p = required(&cfg.paths.comvid, "comvid")?;
    let recs = parse_comvid(open(p)?, ParseOptions { allow_unknown_aspects }).map_err(|e| corpus_err(p, e))?;
    Ok((p.to_path_buf(), recs))
}

fn load_reviews(p: &Path) -> Result<Vec<AmazonReview>, CliError> {
    parse_reviews(open(p)?).map_err(|e| corpus_err(p, e))
}

fn parent_dir(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

enum Providers {
    None,
    Mock {
        embedder: HashEmbedder,
        generator: TemplateGenerator,
        classifier: KeywordClassifier,
        scorer: HashScorer,
    },
    Http(HttpProvider),
}

impl Providers {
    fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(match cfg.provider.kind {
            ProviderKind::None => Providers::None,
            ProviderKind::Mock => Providers::Mock {
                embedder: HashEmbedder::new(cfg.provider.mock_dim),
                generator: TemplateGenerator,
                classifier: KeywordClassifier,
                scorer: HashScorer,
            },
            ProviderKind::Http => {
                let ep = cfg.provider.endpoint()?;
                let p = HttpProvider::with_concurrency(ep, cfg.provider.max_in_flight).map_err(|e| match e {
                    ProviderError::Protocol(m) => CliError::validation(m),
                    other => CliError::unavailable(other.to_string()),
                })?;
                Providers::Http(p)
            }
        })
    }

    fn embedder(&self) -> Option<&dyn Embedder> {
        match self {
            Providers::None => None,
            Providers::Mock { embedder, .. } => Some(embedder),
            Providers::Http(p) => Some(p),
        }
    }

    fn generator(&self) -> Option<&dyn Generator> {
        match self {
            Providers::None => None,
            Providers::Mock { generator, .. } => Some(generator),
            Providers::Http(p) => Some(p),
        }
    }

    fn classifier(&self) -> Option<&dyn Classifier> {
        match self {
            Providers::None => None,
            Providers::Mock { classifier, .. } => Some(classifier),
            Providers::Http(p) => Some(p),
        }
    }

    fn scorer(&self) -> Option<&dyn TokenScorer> {
        match self {
            Providers::None => None,
            Providers::Mock { scorer, .. } => Some(scorer),
            Providers::Http(p) => Some(p),
        }
    }
}

fn need<T>(x: Option<T>, what: &str) -> Result<T, CliError> {
    x.ok_or_else(|| CliError::unavailable(format!("{what} needs a provider; pass --provider mock or a URL")))
}

fn retry(cfg: &RunConfig) -> RetryPolicy {
    RetryPolicy {
        max_retries: cfg.provider.max_retries,
        ..RetryPolicy::default()
    }
}

fn provider_err(e: ProviderError) -> CliError {
    if e.is_unavailable() {
        CliError::unavailable(e.to_string())
    } else {
        CliError::internal(e.to_string())
    }
}

fn stage_err(e: &StageError) -> Exit {
    if e.unavailable {
        Exit::Unavailable
    } else if e.stage == Stage::LoadVideo {
        Exit::Validation
    } else {
        Exit::Internal
    }
}

#[derive(Serialize)]
struct IngestStats {
    records: usize,
    domains: BTreeMap<String, u64>,
    emotions: BTreeMap<String, u64>,
    aspects: BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct FilterReport {
    total: usize,
    kept: usize,
    max_rating: u8,
    min_body_chars: usize,
    min_images: usize,
    /// Per-criterion failure counts; a review can fail several.
    failing_rating: usize,
    failing_body_length: usize,
    failing_images: usize,
}

fn ingest(cfg: &RunConfig, allow_unknown: bool, criteria: &FilterCriteria, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.paths.comvid.is_none() && cfg.paths.reviews.is_none() {
        return Err(CliError::validation("ingest needs --comvid, --reviews or both"));
    }
    let dir = &cfg.paths.output_dir;
    if cfg.paths.comvid.is_some() {
        let (_, recs) = load_comvid(cfg, allow_unknown)?;
        let hist = domain_stats(&recs);
        let mut emotions: BTreeMap<String, u64> = Emotion::ALL.iter().map(|e| (e.as_str().to_string(), 0)).collect();
        let mut aspects: BTreeMap<String, u64> = BTreeMap::new();
        for r in &recs {
            *emotions.entry(r.emotion.as_str().to_string()).or_default() += 1;
            for a in &r.aspects {
                *aspects.entry(a.clone()).or_default() += 1;
            }
        }
        let stats = IngestStats {
            records: recs.len(),
            domains: hist.counts.iter().map(|(d, n)| (d.as_str().to_string(), *n)).collect(),
            emotions,
            aspects,
        };
        write_jsonl_file(&dir.join("comvid.jsonl"), &recs)?;
        write_json(&dir.join("stats.json"), &stats)?;
        writeln!(out, "comvid: {} records valid", recs.len()).map_err(internal)?;
    }
    if let Some(p) = &cfg.paths.reviews {
        require_file(p)?;
        let reviews = load_reviews(p)?;
        let total = reviews.len();
        let report = FilterReport {
            total,
            kept: 0,
            max_rating: criteria.max_rating,
            min_body_chars: criteria.min_text_chars,
            min_images: criteria.min_images,
            failing_rating: reviews.iter().filter(|r| r.rating > criteria.max_rating).count(),
            failing_body_length: reviews
                .iter()
                .filter(|r| r.body.chars().count() <= criteria.min_text_chars)
                .count(),
            failing_images: reviews.iter().filter(|r| r.image_refs.len() < criteria.min_images).count(),
        };
        let kept: Vec<AmazonReview> = filter_complaints(reviews, criteria).collect();
        let report = FilterReport {
            kept: kept.len(),
            ..report
        };
        write_jsonl_file(&dir.join("complaints.jsonl"), &kept)?;
        write_json(&dir.join("filter_report.json"), &report)?;
        writeln!(out, "reviews: kept {} of {}", kept.len(), total).map_err(internal)?;
    }
    Ok(())
}

fn index_path(cfg: &RunConfig) -> PathBuf {
    cfg.paths
        .index
        .clone()
        .unwrap_or_else(|| cfg.paths.output_dir.join("index.fidx"))
}

fn index_err(path: &Path, e: IndexError) -> CliError {
    CliError::validation(format!("{}: {e}", path.display()))
}

fn index_build(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let index = match (&cfg.paths.vectors, &cfg.paths.reviews) {
        (Some(v), _) => {
            require_file(v)?;
            let coll = cvec::read_file(v, None).map_err(|e| CliError::validation(format!("{}: {e}", v.display())))?;
            FlatIndex::from_collection(coll).map_err(|e| index_err(v, e))?
        }
        (None, Some(r)) => {
            require_file(r)?;
            let reviews = load_reviews(r)?;
            let providers = Providers::build(cfg)?;
            let embedder = need(providers.embedder(), "index build --reviews")?;
            let image_root = match &cfg.paths.image_root {
                Some(d) => {
                    require_file(d)?;
                    d.clone()
                }
                None => parent_dir(r),
            };
            let records = embed_reviews(&reviews, &image_root, embedder, retry(cfg), cfg.retrieval.normalize)
                .map_err(|e| match e {
                    MemoryError::Provider(p) => provider_err(p),
                    other => CliError::validation(other.to_string()),
                })?;
            FlatIndex::build(&records).map_err(|e| index_err(r, e))?
        }
        (None, None) => return Err(CliError::validation("index build needs --vectors or --reviews")),
    };
    let path = index_path(cfg);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(internal)?;
    }
    index.save(&path).map_err(internal)?;
    writeln!(out, "index: {} rows, dim {} -> {}", index.len(), index.dim(), path.display()).map_err(internal)
}

#[derive(Serialize)]
struct QueryResult {
    query: String,
    hits: Vec<SearchHit>,
}

fn load_index(cfg: &RunConfig) -> Result<FlatIndex, CliError> {
    let p = index_path(cfg);
    require_file(&p)?;
    FlatIndex::load(&p).map_err(|e| index_err(&p, e))
}

fn index_query(cfg: &RunConfig, queries: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let index = load_index(cfg)?;
    require_file(queries)?;
    let coll = cvec::read_file(queries, None).map_err(|e| CliError::validation(format!("{}: {e}", queries.display())))?;
    let mut results = Vec::with_capacity(coll.len());
    for i in 0..coll.len() {
        let q = coll.vector(i).map_err(|e| CliError::validation(format!("{}: row {i}: {e}", queries.display())))?;
        let hits = index.query(&q, cfg.retrieval.k).map_err(|e| index_err(queries, e))?;
        results.push(QueryResult {
            query: coll.ids[i].clone(),
            hits,
        });
    }
    write_jsonl_file(&cfg.paths.output_dir.join("index_query.jsonl"), &results)?;
    writeln!(out, "index query: {} queries, k = {}", results.len(), cfg.retrieval.k).map_err(internal)
}

struct RetrievalInputs {
    records: Vec<ComVidRecord>,
    memory: ReviewMemory,
    index: FlatIndex,
    video_root: PathBuf,
    providers: Providers,
}

fn retrieval_inputs(cfg: &RunConfig) -> Result<RetrievalInputs, CliError> {
    let (manifest, records) = load_comvid(cfg, false)?;
    let reviews = load_reviews(required(&cfg.paths.reviews, "reviews")?)?;
    let index = load_index(cfg)?;
    let video_root = match &cfg.paths.video_root {
        Some(v) => {
            require_file(v)?;
            v.clone()
        }
        None => parent_dir(&manifest),
    };
    Ok(RetrievalInputs {
        records,
        memory: ReviewMemory::from_reviews(&reviews),
        index,
        video_root,
        providers: Providers::build(cfg)?,
    })
}

fn pipeline_config(cfg: &RunConfig) -> PipelineConfig {
    let r = &cfg.retrieval;
    PipelineConfig {
        alpha: r.alpha,
        k: r.k,
        include_emotion: r.include_emotion,
        dedup_by_product: r.dedup_by_product,
        normalize: r.normalize,
        template: cfg.generation.template.clone(),
        max_tokens: cfg.generation.max_tokens,
        retry: retry(cfg),
    }
}

#[derive(Serialize)]
struct Retrieved {
    review_id: String,
    hits: Vec<SearchHit>,
}

/// A generator that is never called; retrieval stops before generation.
struct NoGenerator;

impl Generator for NoGenerator {
    fn model_id(&self) -> String {
        "none".into()
    }

    fn generate(&self, _: &crate::provider::GenerateRequest) -> Result<(String, Option<u64>), ProviderError> {
        Err(ProviderError::Unavailable("no generator configured".into()))
    }
}

fn retrieve(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let inputs = retrieval_inputs(cfg)?;
    let embedder = need(inputs.providers.embedder(), "retrieve")?;
    let pipeline = Pipeline {
        index: &inputs.index,
        memory: &inputs.memory,
        embedder,
        generator: &NoGenerator,
        config: pipeline_config(cfg),
        video_root: inputs.video_root.clone(),
    };
    let results = pool(cfg)?.install(|| {
        inputs
            .records
            .par_iter()
            .map(|r| pipeline.retrieve(r).map(|hits| Retrieved {
                review_id: r.review_id.clone(),
                hits,
            }))
            .collect::<Vec<_>>()
    });
    let mut ok = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                return Err(CliError {
                    exit: stage_err(&e),
                    message: e.to_string(),
                })
            }
        }
    }
    write_jsonl_file(&cfg.paths.output_dir.join("retrieval.jsonl"), &ok)?;
    writeln!(out, "retrieve: {} records, k = {}", ok.len(), cfg.retrieval.k).map_err(internal)
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(internal)
}

fn read_generated(path: &Path) -> Result<Vec<GeneratedComplaint>, CliError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(internal)?;
        if line.trim().is_empty() {
            continue;
        }
        let g: GeneratedComplaint = serde_json::from_str(&line)
            .map_err(|e| CliError::validation(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        out.push(g);
    }
    Ok(out)
}

fn append_jsonl<T: Serialize>(path: &Path, items: &[T], truncate: bool) -> Result<(), CliError> {
    let f = OpenOptions::new()
        .create(true)
        .write(true)
        .append(!truncate)
        .truncate(truncate)
        .open(path)
        .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    write_jsonl(&mut w, items).and_then(|_| w.flush()).map_err(internal)
}

fn generate(cfg: &RunConfig, resume: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let inputs = retrieval_inputs(cfg)?;
    let embedder = need(inputs.providers.embedder(), "generate")?;
    let generator = need(inputs.providers.generator(), "generate")?;
    let gen_path = cfg.paths.output_dir.join("generated.jsonl");
    let prov_path = cfg.paths.output_dir.join("provenance.jsonl");
    let done: BTreeSet<String> = if resume && gen_path.exists() {
        read_generated(&gen_path)?.into_iter().map(|g| g.review_id).collect()
    } else {
        BTreeSet::new()
    };
    let todo: Vec<ComVidRecord> = inputs
        .records
        .iter()
        .filter(|r| !done.contains(&r.review_id))
        .cloned()
        .collect();
    let pipeline = Pipeline {
        index: &inputs.index,
        memory: &inputs.memory,
        embedder,
        generator,
        config: pipeline_config(cfg),
        video_root: inputs.video_root.clone(),
    };
    let results = run_all(&pipeline, &todo, cfg.jobs);
    let mut generated = Vec::new();
    let mut provenance = Vec::new();
    let mut failures = Vec::new();
    for (prov, res) in results {
        provenance.push(prov);
        match res {
            Ok(g) => generated.push(g),
            Err(e) => failures.push(e),
        }
    }
    let truncate = !resume;
    append_jsonl(&gen_path, &generated, truncate)?;
    append_jsonl(&prov_path, &provenance, truncate)?;
    writeln!(
        out,
        "generate: {} generated, {} already done, {} failed",
        generated.len(),
        done.len(),
        failures.len()
    )
    .map_err(internal)?;
    if let Some(first) = failures.first() {
        let exit = failures
            .iter()
            .map(stage_err)
            .max_by_key(|e| match e {
                Exit::Unavailable => 3,
                Exit::Internal => 2,
                _ => 1,
            })
            .unwrap_or(Exit::Internal);
        let more = if failures.len() > 1 {
            format!(" (and {} more)", failures.len() - 1)
        } else {
            String::new()
        };
        return Err(CliError {
            exit,
            message: format!("{first}{more}"),
        });
    }
    Ok(())
}

fn load_lexicons(cfg: &RunConfig) -> Result<(SentimentLexicon, EmotionLexicon, Option<SynonymTable>), CliError> {
    let sentiment = match &cfg.paths.sentiment_lexicon {
        Some(p) => {
            require_file(p)?;
            SentimentLexicon::parse(&super::read_to_string(p)?)
                .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?
        }
        None => SentimentLexicon::bundled().clone(),
    };
    let emotions = match &cfg.paths.emotion_lexicon {
        Some(p) => {
            require_file(p)?;
            EmotionLexicon::parse(&super::read_to_string(p)?)
                .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?
        }
        None => EmotionLexicon::bundled().clone(),
    };
    let synonyms = match &cfg.paths.synonyms {
        Some(p) => {
            require_file(p)?;
            Some(SynonymTable::parse(&super::read_to_string(p)?))
        }
        None => None,
    };
    Ok((sentiment, emotions, synonyms))
}

fn eval(cfg: &RunConfig, generated_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, records) = load_comvid(cfg, true)?;
    require_file(generated_path)?;
    let generated = read_generated(generated_path)?;
    if generated.is_empty() {
        return Err(CliError::validation(format!("{}: no generated records", generated_path.display())));
    }
    let gold: HashMap<&str, &ComVidRecord> = records.iter().map(|r| (r.review_id.as_str(), r)).collect();
    let pairs = generated
        .iter()
        .map(|g| {
            gold.get(g.review_id.as_str())
                .map(|r| (g, *r))
                .ok_or_else(|| CliError::validation(format!("generated id {:?} has no gold record", g.review_id)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let providers = Providers::build(cfg)?;
    let (sentiment, emotions, synonyms) = load_lexicons(cfg)?;
    let m = &cfg.metrics;
    let judge = match m.aspect_judge {
        JudgeKind::Lexical => AspectJudge::Lexical(AspectLexicon::builtin()),
        JudgeKind::Llm => AspectJudge::Llm {
            classifier: need(providers.classifier(), "aspect_judge = llm")?,
            retry: retry(cfg),
        },
    };
    let evaluator = Evaluator {
        embedder: if m.bertscore || m.moverscore {
            providers.embedder()
        } else {
            None
        },
        scorer: if m.perplexity { providers.scorer() } else { None },
        sentiment: &sentiment,
        emotions: &emotions,
        synonyms: synonyms.as_ref(),
        retry: retry(cfg),
        ..Evaluator::offline(judge)
    };
    let mut samples: Vec<SampleEvaluation> = pool(cfg)?.install(|| {
        pairs
            .par_iter()
            .map(|(g, r)| evaluator.evaluate_sample(&g.text, r))
            .collect()
    });
    for s in &mut samples {
        if !m.bertscore {
            s.metrics.bs = Cell::skipped("disabled");
        }
        if !m.moverscore {
            s.metrics.mos = Cell::skipped("disabled");
        }
        if !m.perplexity {
            s.metrics.ps = Cell::skipped("disabled");
        }
    }
    let reports: Vec<MetricReport> = samples.iter().map(|s| s.metrics.clone()).collect();
    let metrics = MetricReport::mean(&reports).ok_or_else(|| CliError::internal("no samples to aggregate"))?;
    let models: BTreeSet<&str> = generated.iter().map(|g| g.model_id.as_str()).collect();
    let row = ReportRow {
        setting: m.setting.clone(),
        model: models.into_iter().collect::<Vec<_>>().join("+"),
        metrics,
    };
    let dir = &cfg.paths.output_dir;
    write_jsonl_file(&dir.join("eval.jsonl"), &samples)?;
    write_json(&dir.join("summary.json"), &row)?;
    let rows = [row];
    write_file(&dir.join("report.tsv"), render_tsv(&rows).as_bytes())?;
    write_file(&dir.join("report.md"), render_markdown(&rows).as_bytes())?;
    write!(out, "{}", render_tsv(&rows)).map_err(internal)
}

fn report(cfg: &RunConfig, summaries: &[PathBuf], out: &mut dyn Write) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(summaries.len());
    for p in summaries {
        require_file(p)?;
        let row: ReportRow = serde_json::from_str(&super::read_to_string(p)?)
            .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?;
        rows.push(row);
    }
    let dir = &cfg.paths.output_dir;
    write_file(&dir.join("combined_report.tsv"), render_tsv(&rows).as_bytes())?;
    write_file(&dir.join("combined_report.md"), render_markdown(&rows).as_bytes())?;
    write!(out, "{}", render_markdown(&rows)).map_err(internal)
}
