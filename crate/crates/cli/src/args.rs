use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expertfind_core::eval::Metric;
use expertfind_core::{FusionMethod, PruneCandidates, Regime};

#[derive(Debug, Parser)]
#[command(
    name = "expertfind",
    version,
    about = "Find expert reviewers for a paper from an author-document corpus"
)]
pub struct Cli {
    /// Log filter, e.g. `info` or `expertfind_core=debug`. Overrides RUST_LOG.
    #[arg(long, global = true)]
    pub log: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a JSON-lines corpus and write an index artifact.
    BuildIndex(BuildIndexArgs),
    /// Rank experts for one title and abstract.
    Query(QueryArgs),
    /// Score a labeled query file against an index.
    Eval(EvalArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuildRegime {
    #[value(name = "tfidf-cosine", alias = "tfidf")]
    TfidfCosine,
    Wmd,
    Both,
}

impl BuildRegime {
    pub fn regimes(self) -> Vec<Regime> {
        match self {
            Self::TfidfCosine => vec![Regime::TfidfCosine],
            Self::Wmd => vec![Regime::Wmd],
            Self::Both => vec![Regime::TfidfCosine, Regime::Wmd],
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// word2vec text-format vectors; required for the wmd regime.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Defaults to `both` when embeddings are given, else `tfidf-cosine`.
    #[arg(long, value_enum)]
    pub regime: Option<BuildRegime>,
    /// One stopword per line, replacing the built-in English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub min_token_len: usize,
    /// Abort on the first malformed corpus line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// Options shared by commands that load an index and rank.
#[derive(Debug, Args)]
pub struct RankingArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Embeddings the index was built with; enables the wmd regime.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Defaults to wmd when available, else tfidf-cosine.
    #[arg(long)]
    pub regime: Option<Regime>,
    #[arg(long, default_value = "rr")]
    pub fusion: FusionMethod,
    /// Exact WMD budget per query: a count, or `all` to disable pruning.
    #[arg(long, default_value = "200")]
    pub prune: PruneCandidates,
    /// Only documents ranked within this cutoff vote in rr fusion.
    #[arg(long)]
    pub rank_cutoff: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(long = "abstract", default_value = "")]
    pub abstract_text: String,
    /// Comma-separated similarity per document in index order. Skips the
    /// text model and fuses these values directly.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub similarities: Option<Vec<f64>>,
    #[arg(long, default_value_t = expertfind_core::expertrank::DEFAULT_TOP_K)]
    pub top: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub ranking: RankingArgs,
    /// JSON lines of `{title, abstract, relevant: [author_id]}`.
    #[arg(long)]
    pub queries: PathBuf,
    /// `mrr` or `p@<k>`.
    #[arg(long, default_value = "mrr")]
    pub metric: Metric,
    /// Print the report as JSON, including per-query values.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: PathBuf,
}
