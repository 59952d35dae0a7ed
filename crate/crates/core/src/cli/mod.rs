//! The `comvid` command line.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 64 usage error,
//! 69 provider unavailable, 70 internal error.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Validation = 2,
    Usage = 64,
    Unavailable = 69,
    Internal = 70,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Validation,
            message: message.into(),
        }
    }

    pub fn unavailable(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Unavailable,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Internal,
            message: message.into(),
        }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(name = "comvid", version, about = "Retrieval-augmented complaint generation and evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Provider: `none`, `mock`, or an http(s) base URL.
    #[arg(long, global = true, value_name = "SPEC")]
    pub provider: Option<String>,
    /// Environment variable holding the provider bearer token.
    #[arg(long, global = true, value_name = "VAR")]
    pub auth_token_env: Option<String>,
    /// Per-request provider timeout.
    #[arg(long, global = true, value_name = "MS")]
    pub timeout_ms: Option<u64>,
    /// Retries after a timeout or connection failure.
    #[arg(long, global = true, value_name = "N")]
    pub max_retries: Option<u32>,
    /// Worker threads for generate and eval.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Recorded in the run configuration.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the complaint-video manifest and filter the review corpus.
    Ingest(IngestArgs),
    /// Build or query the flat vector index.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Retrieve the nearest reviews for each manifest record.
    Retrieve(RetrieveArgs),
    /// Generate complaint descriptions with retrieval augmentation.
    Generate(GenerateArgs),
    /// Score generated descriptions against the gold annotations.
    Eval(EvalArgs),
    /// Combine evaluation summaries into one table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Complaint-video manifest (JSON Lines).
    #[arg(long, value_name = "FILE")]
    pub comvid: Option<PathBuf>,
    /// Review corpus to filter (JSON Lines).
    #[arg(long, value_name = "FILE")]
    pub reviews: Option<PathBuf>,
    /// Accept aspect labels outside the closed set.
    #[arg(long)]
    pub allow_unknown_aspects: bool,
    /// Highest star rating kept.
    #[arg(long, value_name = "N")]
    pub max_rating: Option<u8>,
    /// Bodies must be longer than this many characters.
    #[arg(long, value_name = "N")]
    pub min_body_chars: Option<usize>,
    /// Fewest attached images kept.
    #[arg(long, value_name = "N")]
    pub min_images: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum IndexCommand {
    /// Build an index from a vector file or by embedding a review corpus.
    Build(IndexBuildArgs),
    /// Query an index with every row of a vector file.
    Query(IndexQueryArgs),
}

#[derive(Debug, Args)]
pub struct IndexBuildArgs {
    /// Precomputed review vectors (CVEC).
    #[arg(long, value_name = "FILE", conflicts_with = "reviews")]
    pub vectors: Option<PathBuf>,
    /// Review corpus to embed with the provider.
    #[arg(long, value_name = "FILE")]
    pub reviews: Option<PathBuf>,
    /// Directory review image refs resolve against.
    #[arg(long, value_name = "DIR")]
    pub image_root: Option<PathBuf>,
    /// Index file to write.
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndexQueryArgs {
    /// Index file to search.
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Query vectors (CVEC); one result line per row.
    #[arg(long, value_name = "FILE")]
    pub queries: PathBuf,
    /// Neighbors per query.
    #[arg(short, long, value_name = "N")]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RetrievalArgs {
    /// Complaint-video manifest (JSON Lines).
    #[arg(long, value_name = "FILE")]
    pub comvid: Option<PathBuf>,
    /// Review corpus the index was built from.
    #[arg(long, value_name = "FILE")]
    pub reviews: Option<PathBuf>,
    /// Index file; defaults to index.fidx in the output directory.
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Directory `video_ref`s resolve against.
    #[arg(long, value_name = "DIR")]
    pub video_root: Option<PathBuf>,
    /// Weight of the video query against the aspect text embedding.
    #[arg(long, value_name = "A")]
    pub alpha: Option<f64>,
    /// Retrieved reviews per record.
    #[arg(short, long, value_name = "N")]
    pub k: Option<usize>,
    /// Use provider vectors as returned instead of L2-normalizing them.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub retrieval: RetrievalArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub retrieval: RetrievalArgs,
    /// Leave the emotion line out of the prompt.
    #[arg(long)]
    pub no_emotion: bool,
    /// Keep only the first retrieved review per product.
    #[arg(long)]
    pub dedup_by_product: bool,
    /// Generation length limit sent to the provider.
    #[arg(long, value_name = "N")]
    pub max_tokens: Option<u32>,
    /// Keep existing outputs and skip ids already generated.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Complaint-video manifest holding the gold annotations.
    #[arg(long, value_name = "FILE")]
    pub comvid: Option<PathBuf>,
    /// Generated complaints (JSON Lines); defaults to the output directory's.
    #[arg(long, value_name = "FILE")]
    pub generated: Option<PathBuf>,
    /// Row label for the report.
    #[arg(long, value_name = "NAME")]
    pub setting: Option<String>,
    /// `lexical` or `llm`.
    #[arg(long, value_name = "KIND")]
    pub aspect_judge: Option<String>,
    /// Report BERTScore as skipped.
    #[arg(long)]
    pub no_bertscore: bool,
    /// Report MoverScore as skipped.
    #[arg(long)]
    pub no_moverscore: bool,
    /// Report perplexity as skipped.
    #[arg(long)]
    pub no_perplexity: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation summaries, one table row each, in the given order.
    #[arg(required = true, value_name = "SUMMARY")]
    pub summaries: Vec<PathBuf>,
}

/// Parses arguments and runs one command. Never panics on bad input.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    Exit::Ok as i32
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    Exit::Usage as i32
                }
            };
        }
    };
    match commands::dispatch(cli, stdout) {
        Ok(()) => Exit::Ok as i32,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.exit as i32
        }
    }
}
