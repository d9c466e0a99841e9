//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use corpusforge_core::corpus::{load_blocks, load_corpus, load_embeddings, save_corpus, EmbeddingSet, PaperRecord};
use corpusforge_core::extract::{build_records, EnglishDictionary, SkipReason, TokenizerConfig};
use corpusforge_core::graphs::{
    build_bipartite, build_citation_graph, common_neighbors_prediction, project_documents_graph,
    project_words_graph, ranked, Direction, Graph, MetricsReport,
};
use corpusforge_core::matching::{match_references, DEFAULT_MATCH_THRESHOLD};
use corpusforge_core::topics::{
    fit_topics, topic_trends, volume_histogram, ClusterParams, ReductionConfig, ReductionMethod,
    TopicModel, DEFAULT_TOP_N,
};
use corpusforge_core::vecsearch::{
    document_vectors, embed_query, keyword_search, normalize_rows, semantic_topk, train_word2vec,
    W2VConfig, WordVectors,
};
use corpusforge_core::extract::tokenize;
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::error::CliError;
use crate::snapshot::{align_embeddings, citation_graph_from_csv, metric_scores, GraphKind, Metric};

#[derive(Debug, Parser)]
#[command(name = "corpusforge", version, about = "Text mining and knowledge extraction for conference proceedings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse text-block JSONL into a corpus of paper records.
    Extract(ExtractArgs),
    /// Match reference titles against paper titles and write citation edges.
    Match(MatchArgs),
    /// Train skip-gram word vectors on corpus tokens.
    W2vTrain(W2vArgs),
    #[command(subcommand)]
    Topics(TopicsCommand),
    #[command(subcommand)]
    Graph(GraphCommand),
    #[command(subcommand)]
    Search(SearchCommand),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub blocks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Word list for the English-ratio gate; the gate is off without it.
    #[arg(long)]
    pub dict: Option<PathBuf>,
    /// Replaces the built-in stopword list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Edge CSV (`src,dst,weight`), citing paper first.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MATCH_THRESHOLD)]
    pub threshold: u8,
    /// Also write every accepted match with its score.
    #[arg(long)]
    pub matches_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct W2vArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// EMB1 output; token counts go to `<out>.counts`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Where document vectors come from.
#[derive(Debug, Args)]
pub struct VectorArgs {
    /// Sentence embeddings (EMB1); mean word vectors are used when absent.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReductionArgs {
    #[arg(long, default_value = "umap")]
    pub method: ReductionMethod,
    #[arg(long, default_value_t = 5)]
    pub target_dim: usize,
    #[arg(long, default_value_t = 15)]
    pub n_neighbors: usize,
    #[arg(long, default_value_t = 0.1)]
    pub min_dist: f64,
    #[arg(long, default_value_t = 200)]
    pub n_epochs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl ReductionArgs {
    fn config(&self) -> ReductionConfig {
        ReductionConfig {
            method: self.method,
            target_dim: self.target_dim,
            n_neighbors: self.n_neighbors,
            min_dist: self.min_dist,
            n_epochs: self.n_epochs,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum TopicsCommand {
    /// Reduce, cluster and label the corpus.
    Fit {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        vectors: VectorArgs,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        reduction: ReductionArgs,
        #[arg(long, default_value_t = 10)]
        min_cluster_size: usize,
        #[arg(long, default_value_t = 10)]
        min_samples: usize,
        /// Treat the whole corpus as noise rather than one topic.
        #[arg(long)]
        no_single_cluster: bool,
        #[arg(long, default_value_t = DEFAULT_TOP_N)]
        top_n: usize,
    },
    /// Per-year topic shares.
    Trends {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        topics: PathBuf,
        /// Years to drop, comma separated.
        #[arg(long, value_delimiter = ',')]
        omit: Vec<i32>,
        /// Topics to drop before renormalizing, comma separated.
        #[arg(long, value_delimiter = ',')]
        hide: Vec<i64>,
    },
    /// Per-year histograms of a 1D projection.
    Volume {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        vectors: VectorArgs,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[command(flatten)]
        reduction: ReductionArgs,
    },
}

#[derive(Debug, Args)]
pub struct GraphSource {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Citation edge CSV; references are matched on the fly when absent.
    #[arg(long)]
    pub citations: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MATCH_THRESHOLD)]
    pub threshold: u8,
    #[arg(long, default_value = "citation")]
    pub graph: GraphKind,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Ranked node centralities.
    Centrality {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        metric: Metric,
        /// Edges followed by closeness on directed graphs.
        #[arg(long, default_value = "in")]
        direction: Direction,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Common-neighbor link prediction.
    Predict {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Write the document and word projections of the bipartite graph.
    Project {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        docs_out: PathBuf,
        #[arg(long)]
        words_out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SearchCommand {
    /// Dot-product search over document vectors.
    Semantic {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        vectors: VectorArgs,
    },
    /// Word-vector keyword ranking with spelling variants.
    Keyword {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        word_vectors: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML configuration; environment and flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub listen: Option<std::net::SocketAddr>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long)]
    pub citations: Option<PathBuf>,
    #[arg(long)]
    pub embedder_url: Option<String>,
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ServeArgs {
    pub fn resolve<I>(&self, env: I) -> Result<ServiceConfig, CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut cfg = match &self.config {
            Some(path) => ServiceConfig::from_file(path)?,
            None => ServiceConfig::default(),
        };
        cfg.apply_env(env)?;
        if let Some(v) = self.listen {
            cfg.listen = v;
        }
        if let Some(v) = &self.corpus {
            cfg.corpus = v.clone();
        }
        if let Some(v) = &self.word_vectors {
            cfg.word_vectors = v.clone();
        }
        if let Some(v) = &self.embeddings {
            cfg.embeddings = Some(v.clone());
        }
        if let Some(v) = &self.topics {
            cfg.topics = Some(v.clone());
        }
        if let Some(v) = &self.citations {
            cfg.citations = Some(v.clone());
        }
        if let Some(v) = &self.embedder_url {
            cfg.embedder_url = Some(v.clone());
        }
        if let Some(v) = &self.ui_dir {
            cfg.ui_dir = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.reduction.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| CliError::Internal(e.to_string()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.flush().map_err(|e| io_err(path, e))
}

/// Unit document vectors in corpus order.
fn doc_vectors(papers: &[PaperRecord], v: &VectorArgs) -> Result<EmbeddingSet, CliError> {
    match (&v.embeddings, &v.word_vectors) {
        (Some(path), _) => {
            let set = load_embeddings(path)?;
            let set = if set.is_normalized() { set } else { normalize_rows(&set)? };
            align_embeddings(papers, &set)
        }
        (None, Some(path)) => Ok(document_vectors(papers, &WordVectors::load(path)?)?),
        (None, None) => Err(CliError::Input(
            "either --embeddings or --word-vectors is required".into(),
        )),
    }
}

fn load_graph(src: &GraphSource) -> Result<Graph, CliError> {
    let papers = load_corpus(&src.corpus)?;
    Ok(match src.graph {
        GraphKind::Citation => match &src.citations {
            Some(path) => citation_graph_from_csv(&papers, path)?,
            None => {
                let ids: Vec<&str> = papers.iter().map(|p| p.id.as_str()).collect();
                build_citation_graph(&ids, &match_references(&papers, src.threshold))?
            }
        },
        GraphKind::Words => project_words_graph(&build_bipartite(&papers)),
        GraphKind::Docs => project_documents_graph(&build_bipartite(&papers)),
    })
}

#[derive(Serialize)]
struct SearchRow<'a> {
    id: &'a str,
    title: &'a str,
    year: i32,
    venue: &'a str,
    score: f64,
}

fn search_rows<'a>(
    papers: &'a [PaperRecord],
    results: &'a [corpusforge_core::vecsearch::QueryResult],
) -> Vec<SearchRow<'a>> {
    results
        .iter()
        .filter_map(|r| {
            papers.iter().find(|p| p.id == r.paper_id).map(|p| SearchRow {
                id: &p.id,
                title: &p.title,
                year: p.year,
                venue: &p.venue,
                score: r.score,
            })
        })
        .collect()
}

fn skip_label(reason: &SkipReason) -> &'static str {
    match reason {
        SkipReason::NoTitle => "no title",
        SkipReason::NoAbstract => "no abstract",
        SkipReason::NotEnglish => "not english",
        SkipReason::NoVenueYear => "no venue/year",
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Extract(a) => {
            let blocks = load_blocks(&a.blocks)?;
            let dict = a.dict.as_ref().map(EnglishDictionary::load).transpose()?;
            let tokenizer = match &a.stopwords {
                Some(path) => TokenizerConfig::default().with_stopword_file(path)?,
                None => TokenizerConfig::default(),
            };
            let (records, summary) = build_records(&blocks, dict.as_ref(), &tokenizer);
            save_corpus(&records, &a.out)?;
            for (id, reason) in &summary.skipped {
                tracing::info!("skipped {id}: {}", skip_label(reason));
            }
            eprintln!(
                "extracted {} of {} papers into {}",
                summary.kept,
                blocks.len(),
                a.out.display()
            );
        }
        Command::Match(a) => {
            if a.threshold > 100 {
                return Err(CliError::Input("--threshold must be <= 100".into()));
            }
            let papers = load_corpus(&a.corpus)?;
            let matches = match_references(&papers, a.threshold);
            let ids: Vec<&str> = papers.iter().map(|p| p.id.as_str()).collect();
            let g = build_citation_graph(&ids, &matches)?;
            let file = File::create(&a.out).map_err(|e| io_err(&a.out, e))?;
            g.write_edge_csv(BufWriter::new(file))?;
            if let Some(path) = &a.matches_json {
                write_json(&matches, path)?;
            }
            eprintln!("{} citation edges written to {}", g.edge_count(), a.out.display());
        }
        Command::W2vTrain(a) => {
            let papers = load_corpus(&a.corpus)?;
            let sentences: Vec<Vec<String>> = papers.into_iter().map(|p| p.tokens).collect();
            let cfg = W2VConfig {
                dim: a.dim,
                window: a.window,
                negatives: a.negatives,
                min_count: a.min_count,
                epochs: a.epochs,
                seed: a.seed,
                ..W2VConfig::default()
            };
            let wv = train_word2vec(&sentences, &cfg)?;
            wv.save(&a.out)?;
            eprintln!("{} word vectors written to {}", wv.tokens().len(), a.out.display());
        }
        Command::Topics(TopicsCommand::Fit {
            corpus,
            vectors,
            out,
            reduction,
            min_cluster_size,
            min_samples,
            no_single_cluster,
            top_n,
        }) => {
            let papers = load_corpus(&corpus)?;
            let set = doc_vectors(&papers, &vectors)?;
            let cluster = ClusterParams {
                min_cluster_size,
                min_samples,
                allow_single_cluster: !no_single_cluster,
            };
            let model = fit_topics(&set, &papers, &reduction.config(), &cluster, top_n)?;
            model.save(&out)?;
            eprintln!(
                "{} topics, {} noise papers, written to {}",
                model.topic_count(),
                model.noise_count(),
                out.display()
            );
        }
        Command::Topics(TopicsCommand::Trends { corpus, topics, omit, hide }) => {
            let papers = load_corpus(&corpus)?;
            let model = TopicModel::load(&topics)?;
            print_json(&topic_trends(&model, &papers, &omit, &hide)?)?;
        }
        Command::Topics(TopicsCommand::Volume { corpus, vectors, bins, reduction }) => {
            let papers = load_corpus(&corpus)?;
            let set = doc_vectors(&papers, &vectors)?;
            print_json(&volume_histogram(&set, &papers, bins, &reduction.config())?)?;
        }
        Command::Graph(GraphCommand::Centrality { source, metric, direction, top }) => {
            let g = load_graph(&source)?;
            let scores = metric_scores(&g, metric, direction)?;
            print_json(&MetricsReport {
                graph: format!("{:?}", source.graph).to_lowercase(),
                metric: format!("{metric:?}").to_lowercase(),
                nodes: ranked(&g, &scores, top),
            })?;
        }
        Command::Graph(GraphCommand::Predict { source, top }) => {
            let g = load_graph(&source)?;
            print_json(&common_neighbors_prediction(&g, top))?;
        }
        Command::Graph(GraphCommand::Project { corpus, docs_out, words_out }) => {
            let papers = load_corpus(&corpus)?;
            let b = build_bipartite(&papers);
            for (g, path) in [
                (project_documents_graph(&b), &docs_out),
                (project_words_graph(&b), &words_out),
            ] {
                let file = File::create(path).map_err(|e| io_err(path, e))?;
                g.write_edge_csv(BufWriter::new(file))?;
            }
        }
        Command::Search(SearchCommand::Semantic { q, k, corpus, vectors }) => {
            if k == 0 {
                return Err(CliError::Input("--k must be >= 1".into()));
            }
            let papers = load_corpus(&corpus)?;
            let set = doc_vectors(&papers, &vectors)?;
            let Some(wv_path) = &vectors.word_vectors else {
                return Err(CliError::Input("--word-vectors is required to embed the query".into()));
            };
            let wv = WordVectors::load(wv_path)?;
            let query = embed_query(&q, &wv, &TokenizerConfig::default())?;
            let results = semantic_topk(&query, &set, k)?;
            print_json(&search_rows(&papers, &results))?;
        }
        Command::Search(SearchCommand::Keyword { q, k, corpus, word_vectors }) => {
            if k == 0 {
                return Err(CliError::Input("--k must be >= 1".into()));
            }
            let papers = load_corpus(&corpus)?;
            let wv = WordVectors::load(&word_vectors)?;
            let keywords = tokenize(&q, &TokenizerConfig::default());
            if keywords.is_empty() {
                return Err(CliError::Input("query has no searchable keywords".into()));
            }
            let results = keyword_search(&keywords, &papers, &wv, k)?;
            print_json(&search_rows(&papers, &results))?;
        }
        Command::Serve(a) => {
            let cfg = a.resolve(std::env::vars())?;
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::Internal(format!("cannot start runtime: {e}")))?;
            runtime.block_on(crate::api::serve(cfg))?;
        }
    }
    Ok(())
}
