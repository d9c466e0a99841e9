use std::collections::{BTreeMap, BTreeSet};

use super::Graph;
use crate::corpus::PaperRecord;

/// Documents on one side, unique words on the other; an edge links a
/// document to every distinct word in its abstract tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    doc_nodes: Vec<String>,
    word_nodes: Vec<String>,
    /// Per document, sorted indices into `word_nodes`.
    doc_words: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Builds from `(document id, tokens)` pairs.
    pub fn from_documents<'a, I, T>(docs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, T)>,
        T: IntoIterator<Item = &'a str>,
    {
        let docs: Vec<(String, BTreeSet<&str>)> = docs
            .into_iter()
            .map(|(id, toks)| (id.to_string(), toks.into_iter().collect()))
            .collect();
        let vocab: BTreeSet<&str> = docs.iter().flat_map(|(_, w)| w.iter().copied()).collect();
        let word_index: BTreeMap<&str, usize> =
            vocab.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        let doc_words = docs
            .iter()
            .map(|(_, words)| words.iter().map(|w| word_index[w]).collect())
            .collect();
        BipartiteGraph {
            doc_nodes: docs.into_iter().map(|(id, _)| id).collect(),
            word_nodes: vocab.into_iter().map(str::to_string).collect(),
            doc_words,
        }
    }

    pub fn doc_nodes(&self) -> &[String] {
        &self.doc_nodes
    }

    pub fn word_nodes(&self) -> &[String] {
        &self.word_nodes
    }

    pub fn edge_count(&self) -> usize {
        self.doc_words.iter().map(Vec::len).sum()
    }

    /// `(document, word)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.doc_words.iter().enumerate().flat_map(move |(d, ws)| {
            ws.iter()
                .map(move |&w| (self.doc_nodes[d].as_str(), self.word_nodes[w].as_str()))
        })
    }

    pub fn words_of(&self, doc: usize) -> &[usize] {
        &self.doc_words[doc]
    }

    fn docs_by_word(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.word_nodes.len()];
        for (d, ws) in self.doc_words.iter().enumerate() {
            for &w in ws {
                out[w].push(d);
            }
        }
        out
    }
}

pub fn build_bipartite(papers: &[PaperRecord]) -> BipartiteGraph {
    BipartiteGraph::from_documents(
        papers
            .iter()
            .map(|p| (p.id.as_str(), p.tokens.iter().map(String::as_str))),
    )
}

fn project(nodes: &[String], groups: &[Vec<usize>]) -> Graph {
    let mut weights: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for members in groups {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                *weights.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    let mut g = Graph::new(nodes.iter().cloned(), false).expect("unique node ids");
    for ((a, b), w) in weights {
        g.add_edge_idx(a, b, w as f64).expect("distinct endpoints");
    }
    g
}

/// Documents linked by shared words; weight = number of shared words.
pub fn project_documents_graph(b: &BipartiteGraph) -> Graph {
    project(&b.doc_nodes, &b.docs_by_word())
}

/// Words linked by co-occurrence; weight = number of documents containing both.
pub fn project_words_graph(b: &BipartiteGraph) -> Graph {
    project(&b.word_nodes, &b.doc_words)
}
