//! Subcommand implementations.

use std::io::Write;

use expertfind_core::corpus::load_corpus;
use expertfind_core::eval::{evaluate, load_eval_records};
use expertfind_core::expertrank::{fuse, rank_documents, top_k, VotingConfig};
use expertfind_core::textmodel::load_embeddings;
use expertfind_core::{
    EmbeddingStore, Engine, ExpertRanking, LoadOptions, RankingConfig, SimilarityTable, Tokenizer,
};
use serde::Serialize;

use crate::args::{BuildIndexArgs, BuildRegime, EvalArgs, QueryArgs, RankingArgs, ServeArgs};
use crate::error::CliError;

type CmdResult = Result<(), CliError>;

fn read_embeddings(path: &std::path::Path) -> Result<EmbeddingStore, CliError> {
    let (store, warnings) = load_embeddings(path)?;
    for w in warnings {
        tracing::warn!(?w, "embeddings");
    }
    Ok(store)
}

fn write_stdout(bytes: &[u8]) -> CmdResult {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Runtime(format!("cannot write output: {e}")))
}

pub fn build_index(args: BuildIndexArgs) -> CmdResult {
    let regime = args.regime.unwrap_or(if args.embeddings.is_some() {
        BuildRegime::Both
    } else {
        BuildRegime::TfidfCosine
    });
    let regimes = regime.regimes();
    let wants_wmd = regimes.contains(&expertfind_core::Regime::Wmd);
    if wants_wmd && args.embeddings.is_none() {
        return Err(expertfind_core::Error::EmbeddingsRequired.into());
    }
    let tokenizer = match &args.stopwords {
        Some(path) => Tokenizer::from_stopword_file(path, args.min_token_len)?,
        None => Tokenizer::new(
            expertfind_core::textmodel::DEFAULT_STOPWORDS
                .iter()
                .copied(),
            args.min_token_len,
        ),
    };
    let options = LoadOptions {
        strict: args.strict,
        tokenizer: Some(tokenizer.clone()),
    };
    let report = load_corpus(&args.corpus, &options)?;
    for e in &report.errors {
        eprintln!(
            "warning: {}: line {}: {}",
            args.corpus.display(),
            e.line,
            e.message
        );
    }
    let store = match (&args.embeddings, wants_wmd) {
        (Some(path), true) => Some(read_embeddings(path)?),
        _ => None,
    };
    let engine = Engine::build(report.articles, tokenizer, &regimes, store)?;
    engine.save(&args.out)?;

    let index = engine.index();
    let mut summary = format!(
        "documents: {}\nauthors: {}\nedges: {}\n",
        index.num_docs(),
        index.num_authors(),
        index.num_edges()
    );
    if let Some(t) = engine.tfidf() {
        summary += &format!("vocabulary: {}\n", t.model.vocabulary_size());
    }
    if let Some(w) = engine.wmd() {
        let missing = w.documents.iter().filter(|d| d.is_none()).count();
        summary += &format!("nbow documents without embedded tokens: {missing}\n");
    }
    summary += &format!("skipped lines: {}\n", report.errors.len());
    summary += &format!("written: {}\n", args.out.display());
    write_stdout(summary.as_bytes())
}

fn load_engine(args: &RankingArgs) -> Result<Engine, CliError> {
    let store = args
        .embeddings
        .as_deref()
        .map(read_embeddings)
        .transpose()?;
    Ok(Engine::load(&args.index, store)?)
}

fn ranking_config(
    args: &RankingArgs,
    engine: &Engine,
    top: usize,
) -> Result<RankingConfig, CliError> {
    let regime = match args.regime {
        Some(r) => r,
        None => engine
            .default_regime()
            .ok_or_else(|| CliError::Data("index holds no servable representation".into()))?,
    };
    let mut config = RankingConfig::new(regime, args.fusion);
    config.top_k = top;
    config.scoring.prune_candidates = args.prune;
    config.voting.rank_cutoff = args.rank_cutoff;
    Ok(config)
}

#[derive(Serialize)]
struct QueryOutput<'a> {
    regime: Option<expertfind_core::Regime>,
    fusion: expertfind_core::FusionMethod,
    title: &'a str,
    #[serde(rename = "abstract")]
    abstract_text: &'a str,
    authors: Vec<AuthorOutput>,
}

#[derive(Serialize)]
struct AuthorOutput {
    rank: usize,
    author_id: String,
    name: String,
    score: f64,
    documents: Vec<DocumentOutput>,
}

#[derive(Serialize)]
struct DocumentOutput {
    doc_id: String,
    rank: usize,
    similarity: f64,
    contribution: f64,
}

pub fn query(args: QueryArgs) -> CmdResult {
    let engine = load_engine(&args.ranking)?;
    let (regime, table, ranking): (_, SimilarityTable, ExpertRanking) = match &args.similarities {
        Some(sims) => {
            let n = engine.index().num_docs();
            if sims.len() != n {
                return Err(CliError::Usage(format!(
                    "--similarities has {} values but the index has {n} documents",
                    sims.len()
                )));
            }
            let table = SimilarityTable::from_similarities(sims.iter().copied());
            let voting = VotingConfig {
                method: args.ranking.fusion,
                rank_cutoff: args.ranking.rank_cutoff,
            };
            let ranking = fuse(&table, engine.index(), &voting);
            (None, table, ranking)
        }
        None => {
            let config = ranking_config(&args.ranking, &engine, args.top)?;
            let (_, _, scored) = engine.query(&args.title, &args.abstract_text, &config)?;
            (Some(config.regime), scored.table, scored.ranking)
        }
    };

    let index = engine.index();
    let ranked = rank_documents(&table);
    let authors: Vec<AuthorOutput> = top_k(&ranking, args.top)
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let record = index.author(s.author);
            let mut documents: Vec<DocumentOutput> = s
                .contributions
                .iter()
                .map(|c| DocumentOutput {
                    doc_id: index.document(c.doc).doc_id.clone(),
                    rank: ranked.rank_of(c.doc),
                    similarity: table.similarity(c.doc),
                    contribution: c.value,
                })
                .collect();
            documents.sort_by_key(|d| d.rank);
            AuthorOutput {
                rank: i + 1,
                author_id: record.author_id.clone(),
                name: record.display_name.clone(),
                score: s.score,
                documents,
            }
        })
        .collect();

    if args.json {
        let output = QueryOutput {
            regime,
            fusion: ranking.method,
            title: &args.title,
            abstract_text: &args.abstract_text,
            authors,
        };
        let mut bytes =
            serde_json::to_vec_pretty(&output).map_err(|e| CliError::Runtime(e.to_string()))?;
        bytes.push(b'\n');
        return write_stdout(&bytes);
    }
    let mut text = String::new();
    for a in &authors {
        let docs: Vec<&str> = a.documents.iter().map(|d| d.doc_id.as_str()).collect();
        text += &format!(
            "{}\t{}\t{:.4}\t{}\t{}\n",
            a.rank,
            a.author_id,
            a.score,
            a.name,
            docs.join(",")
        );
    }
    write_stdout(text.as_bytes())
}

pub fn eval(args: EvalArgs) -> CmdResult {
    let engine = load_engine(&args.ranking)?;
    let config = ranking_config(
        &args.ranking,
        &engine,
        expertfind_core::expertrank::DEFAULT_TOP_K,
    )?;
    let records = load_eval_records(&args.queries)?;
    let report = evaluate(&engine, &records, &config, args.metric);
    for msg in &report.skipped {
        eprintln!("warning: {msg}");
    }
    if args.json {
        let mut bytes =
            serde_json::to_vec_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
        bytes.push(b'\n');
        return write_stdout(&bytes);
    }
    write_stdout(
        format!(
            "{} {:.4} (evaluated {}, skipped {})\n",
            report.metric,
            report.value,
            report.evaluated,
            report.skipped.len()
        )
        .as_bytes(),
    )
}

pub fn serve(args: ServeArgs) -> CmdResult {
    let config = expertfind_service::ServiceConfig::load(&args.config)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async {
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        expertfind_service::serve(config, shutdown).await
    })?;
    Ok(())
}
