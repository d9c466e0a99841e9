//! Citation and document-word graphs with centrality analytics.

mod bipartite;
mod centrality;
mod citation;

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use bipartite::{build_bipartite, project_documents_graph, project_words_graph, BipartiteGraph};
pub use centrality::{
    betweenness, closeness, common_neighbors_for, common_neighbors_prediction, degree_centrality,
    eigenvector, eigenvector_with, Direction, EigenOptions, LinkPrediction, DEFAULT_EIGEN_MAX_ITER,
    DEFAULT_EIGEN_TOL,
};
pub use citation::build_citation_graph;

use crate::{Error, Result};

/// Simple graph over string-named nodes. Edges are unique, self-loops are
/// rejected, and each edge carries a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    directed: bool,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl Graph {
    pub fn new<I, S>(nodes: I, directed: bool) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::DuplicateId(n.clone()));
            }
        }
        let n = nodes.len();
        Ok(Graph {
            nodes,
            index,
            directed,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            edge_count: 0,
        })
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Adds an edge by index. Returns `false` if it already existed, in which
    /// case the larger weight is kept.
    pub fn add_edge_idx(&mut self, u: usize, v: usize, weight: f64) -> Result<bool> {
        let n = self.nodes.len();
        if u >= n || v >= n {
            return Err(Error::InvalidInput(format!("edge ({u}, {v}) out of range")));
        }
        if u == v {
            return Err(Error::InvalidInput(format!(
                "self-loop on {:?}",
                self.nodes[u]
            )));
        }
        if let Some(e) = self.out_adj[u].iter_mut().find(|(t, _)| *t == v) {
            e.1 = e.1.max(weight);
            let w = e.1;
            if let Some(r) = self.in_adj[v].iter_mut().find(|(s, _)| *s == u) {
                r.1 = w;
            }
            if !self.directed {
                self.sync_undirected_weight(v, u, w);
            }
            return Ok(false);
        }
        self.out_adj[u].push((v, weight));
        self.in_adj[v].push((u, weight));
        if !self.directed {
            self.out_adj[v].push((u, weight));
            self.in_adj[u].push((v, weight));
        }
        self.edge_count += 1;
        Ok(true)
    }

    fn sync_undirected_weight(&mut self, u: usize, v: usize, w: f64) {
        if let Some(e) = self.out_adj[u].iter_mut().find(|(t, _)| *t == v) {
            e.1 = w;
        }
        if let Some(e) = self.in_adj[v].iter_mut().find(|(s, _)| *s == u) {
            e.1 = w;
        }
    }

    pub fn add_edge(&mut self, u: &str, v: &str, weight: f64) -> Result<bool> {
        let ui = self
            .node_index(u)
            .ok_or_else(|| Error::UnknownId(u.to_string()))?;
        let vi = self
            .node_index(v)
            .ok_or_else(|| Error::UnknownId(v.to_string()))?;
        self.add_edge_idx(ui, vi, weight)
    }

    /// Successors (directed) or neighbors (undirected) with edge weights.
    pub fn out_neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.out_adj[u]
    }

    /// Predecessors (directed) or neighbors (undirected) with edge weights.
    pub fn in_neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.in_adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_adj[u].iter().any(|(t, _)| *t == v)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.out_adj[u].iter().find(|(t, _)| *t == v).map(|e| e.1)
    }

    /// Edges as `(u, v, weight)`; each undirected edge appears once with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, adj) in self.out_adj.iter().enumerate() {
            for &(v, w) in adj {
                if self.directed || u < v {
                    out.push((u, v, w));
                }
            }
        }
        out.sort_by_key(|e| (e.0, e.1));
        out
    }

    /// Undirected copy: an edge exists if either direction does, weight is
    /// the larger of the two.
    pub fn undirected_view(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        let mut g = Graph::new(self.nodes.iter().cloned(), false).expect("nodes already unique");
        for (u, v, w) in self.edges() {
            g.add_edge_idx(u, v, w).expect("valid edge");
        }
        g
    }

    /// Sorted, deduplicated neighbor indices ignoring direction.
    pub fn undirected_neighbors(&self, u: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.out_adj[u]
            .iter()
            .chain(&self.in_adj[u])
            .map(|e| e.0)
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// Writes `src,dst,weight` rows with a header line.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::InvalidInput(format!("csv write: {e}"));
        w.write_record(["src", "dst", "weight"]).map_err(to_err)?;
        for (u, v, weight) in self.edges() {
            w.write_record([&self.nodes[u], &self.nodes[v], &weight.to_string()])
                .map_err(to_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidInput(format!("csv flush: {e}")))
    }
}

/// One row of an edge-list CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: String,
    pub dst: String,
    pub weight: f64,
}

pub fn read_edge_csv<R: Read>(input: R) -> Result<Vec<EdgeRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize()
        .enumerate()
        .map(|(i, rec)| {
            rec.map_err(|e| Error::InvalidInput(format!("edge csv row {}: {e}", i + 2)))
        })
        .collect()
}

/// Node scores paired with their ids, best first (ties by id).
pub fn ranked(g: &Graph, scores: &[f64], top: Option<usize>) -> Vec<NodeScore> {
    let mut out: Vec<NodeScore> = g
        .nodes()
        .iter()
        .zip(scores)
        .map(|(id, &score)| NodeScore {
            id: id.clone(),
            score,
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id))
    });
    if let Some(k) = top {
        out.truncate(k);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScore {
    pub id: String,
    pub score: f64,
}

/// JSON report of one centrality over a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub graph: String,
    pub metric: String,
    pub nodes: Vec<NodeScore>,
}
