//! Immutable, fully built view of one corpus and everything derived from it.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use corpusforge_core::corpus::{load_corpus, load_embeddings, EmbeddingSet, PaperRecord};
use corpusforge_core::extract::TokenizerConfig;
use corpusforge_core::graphs::{
    betweenness, build_bipartite, build_citation_graph, closeness, degree_centrality, eigenvector,
    project_documents_graph, project_words_graph, ranked, read_edge_csv, Direction, Graph,
    NodeScore, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL,
};
use corpusforge_core::matching::match_references;
use corpusforge_core::topics::{fit_topics, reduce, ReductionConfig, TopicModel};
use corpusforge_core::vecsearch::{document_vectors, normalize_rows, WordVectors};
use corpusforge_core::Error;
use parking_lot::Mutex;
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Citation,
    Words,
    Docs,
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "citation" => Ok(GraphKind::Citation),
            "words" => Ok(GraphKind::Words),
            "docs" => Ok(GraphKind::Docs),
            other => Err(format!("unknown graph {other:?}; expected citation, words or docs")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Closeness,
    Betweenness,
    Eigenvector,
    Degree,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "closeness" => Ok(Metric::Closeness),
            "betweenness" => Ok(Metric::Betweenness),
            "eigenvector" => Ok(Metric::Eigenvector),
            "degree" => Ok(Metric::Degree),
            other => Err(format!(
                "unknown metric {other:?}; expected closeness, betweenness, eigenvector or degree"
            )),
        }
    }
}

pub fn metric_scores(g: &Graph, metric: Metric, direction: Direction) -> corpusforge_core::Result<Vec<f64>> {
    match metric {
        Metric::Closeness => Ok(closeness(g, direction)),
        Metric::Betweenness => Ok(betweenness(g)),
        Metric::Eigenvector => eigenvector(g, DEFAULT_EIGEN_TOL, DEFAULT_EIGEN_MAX_ITER),
        Metric::Degree => degree_centrality(g),
    }
}

/// Directed citation graph from a `src,dst,weight` CSV over the given papers.
pub fn citation_graph_from_csv(papers: &[PaperRecord], path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let edges = read_edge_csv(file)?;
    let mut g = Graph::new(papers.iter().map(|p| p.id.clone()), true)?;
    for e in edges {
        g.add_edge(&e.src, &e.dst, e.weight)?;
    }
    Ok(g)
}

type CentralityKey = (GraphKind, Metric, Direction);

pub struct Snapshot {
    pub papers: Vec<PaperRecord>,
    index: HashMap<String, usize>,
    /// Unit rows in paper order.
    pub embeddings: EmbeddingSet,
    pub word_vectors: WordVectors,
    pub topics: TopicModel,
    pub citations: Graph,
    pub doc_graph: Graph,
    pub word_graph: Graph,
    pub tokenizer: TokenizerConfig,
    pub reduction: ReductionConfig,
    pub default_k: usize,
    pub volume_bins: usize,
    pub embedder_url: Option<String>,
    centrality: Mutex<HashMap<CentralityKey, Arc<Vec<NodeScore>>>>,
    projection_1d: OnceLock<Result<Vec<f64>, String>>,
}

impl Snapshot {
    pub fn build(cfg: &ServiceConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let papers = load_corpus(&cfg.corpus)?;
        let word_vectors = WordVectors::load(&cfg.word_vectors)?;
        let embeddings = match &cfg.embeddings {
            Some(path) => {
                let set = load_embeddings(path)?;
                let set = if set.is_normalized() { set } else { normalize_rows(&set)? };
                align_embeddings(&papers, &set)?
            }
            None => document_vectors(&papers, &word_vectors)?,
        };
        let topics = match &cfg.topics {
            Some(path) => TopicModel::load(path)?,
            None => fit_topics(&embeddings, &papers, &cfg.reduction, &cfg.cluster, cfg.top_n)?,
        };
        let citations = match &cfg.citations {
            Some(path) => citation_graph_from_csv(&papers, path)?,
            None => {
                let ids: Vec<&str> = papers.iter().map(|p| p.id.as_str()).collect();
                build_citation_graph(&ids, &match_references(&papers, cfg.match_threshold))?
            }
        };
        Snapshot::assemble(papers, embeddings, word_vectors, topics, citations, cfg)
    }

    pub fn assemble(
        papers: Vec<PaperRecord>,
        embeddings: EmbeddingSet,
        word_vectors: WordVectors,
        topics: TopicModel,
        citations: Graph,
        cfg: &ServiceConfig,
    ) -> Result<Self, CliError> {
        let index: HashMap<String, usize> =
            papers.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();
        let embeddings = align_embeddings(&papers, &embeddings)?;
        if topics.ids.len() != papers.len() || topics.ids.iter().any(|id| !index.contains_key(id)) {
            return Err(CliError::Input(
                "topic model does not cover exactly the corpus papers".into(),
            ));
        }
        if citations.nodes().iter().any(|id| !index.contains_key(id)) {
            return Err(CliError::Input("citation graph references unknown papers".into()));
        }
        let bipartite = build_bipartite(&papers);
        Ok(Snapshot {
            doc_graph: project_documents_graph(&bipartite),
            word_graph: project_words_graph(&bipartite),
            papers,
            index,
            embeddings,
            word_vectors,
            topics,
            citations,
            tokenizer: TokenizerConfig::default(),
            reduction: cfg.reduction.clone(),
            default_k: cfg.default_k,
            volume_bins: cfg.volume_bins,
            embedder_url: cfg.embedder_url.clone(),
            centrality: Mutex::new(HashMap::new()),
            projection_1d: OnceLock::new(),
        })
    }

    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.index.get(id).map(|&i| &self.papers[i])
    }

    pub fn paper_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn topic_of(&self, id: &str) -> Option<i64> {
        self.topics.label_of(id)
    }

    pub fn graph(&self, kind: GraphKind) -> &Graph {
        match kind {
            GraphKind::Citation => &self.citations,
            GraphKind::Words => &self.word_graph,
            GraphKind::Docs => &self.doc_graph,
        }
    }

    /// Ranked node scores, computed once per (graph, metric, direction).
    pub fn centrality(
        &self,
        kind: GraphKind,
        metric: Metric,
        direction: Direction,
    ) -> corpusforge_core::Result<Arc<Vec<NodeScore>>> {
        let key = (kind, metric, direction);
        let mut cache = self.centrality.lock();
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.clone());
        }
        let g = self.graph(kind);
        let scores = metric_scores(g, metric, direction)?;
        let out = Arc::new(ranked(g, &scores, None));
        cache.insert(key, out.clone());
        Ok(out)
    }

    /// 1D projection of every paper's embedding, in paper order.
    pub fn projection_1d(&self) -> Result<&[f64], String> {
        self.projection_1d
            .get_or_init(|| {
                reduce(&self.embeddings, &self.reduction.with_dim(1))
                    .map(|rows| rows.into_iter().map(|r| r[0]).collect())
                    .map_err(|e| e.to_string())
            })
            .as_deref()
            .map_err(Clone::clone)
    }
}

/// Reorders embedding rows into paper order, requiring a one-to-one match.
pub fn align_embeddings(papers: &[PaperRecord], set: &EmbeddingSet) -> Result<EmbeddingSet, CliError> {
    if set.len() != papers.len() {
        return Err(CliError::Input(format!(
            "{} embeddings for {} papers",
            set.len(),
            papers.len()
        )));
    }
    if papers.iter().zip(set.ids()).all(|(p, id)| &p.id == id) {
        return Ok(set.clone());
    }
    let mut data = Vec::with_capacity(set.data().len());
    for p in papers {
        let i = set
            .index_of(&p.id)
            .ok_or_else(|| CliError::from(Error::UnknownId(p.id.clone())))?;
        data.extend_from_slice(set.row(i));
    }
    let ids = papers.iter().map(|p| p.id.clone()).collect();
    Ok(EmbeddingSet::new(ids, set.dim(), data, set.is_normalized())?)
}
