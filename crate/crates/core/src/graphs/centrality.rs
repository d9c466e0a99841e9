use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::{Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 1000;

/// Which edges a shortest path may follow when measuring distance to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, Hash)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Paths ending at the node: who can reach it.
    #[default]
    In,
    /// Paths starting at the node: whom it can reach.
    Out,
    Undirected,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            "undirected" => Ok(Direction::Undirected),
            other => Err(Error::InvalidInput(format!("unknown direction {other:?}"))),
        }
    }
}

fn bfs_distances(g: &Graph, source: usize, dir: Direction) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    let follow_both = dir == Direction::Undirected && g.is_directed();
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        let next: Vec<usize> = if follow_both {
            g.undirected_neighbors(u)
        } else if dir == Direction::In {
            g.in_neighbors(u).iter().map(|e| e.0).collect()
        } else {
            g.out_neighbors(u).iter().map(|e| e.0).collect()
        };
        for v in next {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Closeness with Wasserman-Faust scaling for disconnected graphs:
/// `C(u) = ((r-1)/(n-1)) * ((r-1)/sum d)`, where `r` counts the nodes
/// (including `u`) connected to `u` along `dir`.
pub fn closeness(g: &Graph, dir: Direction) -> Vec<f64> {
    let n = g.node_count();
    (0..n)
        .map(|u| {
            let dist = bfs_distances(g, u, dir);
            let (reached, total) = dist
                .iter()
                .flatten()
                .fold((0usize, 0usize), |(r, s), &d| (r + 1, s + d));
            if reached <= 1 || n <= 1 {
                return 0.0;
            }
            let r = (reached - 1) as f64;
            (r / (n - 1) as f64) * (r / total as f64)
        })
        .collect()
}

/// Brandes betweenness on the unweighted structure, respecting direction for
/// directed graphs. Normalized by `(n-1)(n-2)` (directed) or
/// `(n-1)(n-2)/2` (undirected).
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut cb = vec![0.0f64; n];
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            if g.is_directed() {
                g.out_neighbors(u).iter().map(|e| e.0).collect()
            } else {
                g.undirected_neighbors(u)
            }
        })
        .collect();

    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    for s in 0..n {
        stack.clear();
        preds.iter_mut().for_each(Vec::clear);
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = -1);
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &neighbors[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        delta.iter_mut().for_each(|x| *x = 0.0);
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    if n < 3 {
        return vec![0.0; n];
    }
    // each undirected pair is counted from both ends, which the halved
    // normalizer absorbs: raw/2 / ((n-1)(n-2)/2)
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    cb.iter().map(|x| x * scale).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Use edge weights instead of 0/1 adjacency.
    pub weighted: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: DEFAULT_EIGEN_TOL,
            max_iter: DEFAULT_EIGEN_MAX_ITER,
            weighted: false,
        }
    }
}

pub fn eigenvector(g: &Graph, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    eigenvector_with(
        g,
        EigenOptions {
            tol,
            max_iter,
            ..EigenOptions::default()
        },
    )
}

/// Dominant eigenvector of the undirected adjacency, unit L2 norm.
///
/// Iterates with `A + I`: same eigenvectors as `A`, but the shift keeps
/// bipartite graphs (stars, paths) from oscillating between `±λ`.
pub fn eigenvector_with(g: &Graph, opts: EigenOptions) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidInput("eigenvector centrality of an empty graph".into()));
    }
    let u = g.undirected_view();
    let adj: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            u.out_neighbors(i)
                .iter()
                .map(|&(j, w)| (j, if opts.weighted { w } else { 1.0 }))
                .collect()
        })
        .collect();

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..opts.max_iter {
        for i in 0..n {
            next[i] = x[i] + adj[i].iter().map(|&(j, w)| w * x[j]).sum::<f64>();
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= norm);
        let diff = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if diff < opts.tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(opts.max_iter))
}

/// `degree / (n - 1)` on the undirected view.
pub fn degree_centrality(g: &Graph) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidInput(
            "degree centrality needs at least two nodes".into(),
        ));
    }
    Ok((0..n)
        .map(|u| g.undirected_neighbors(u).len() as f64 / (n - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPrediction {
    pub u: String,
    pub v: String,
    pub score: usize,
}

fn prediction_order(a: &LinkPrediction, b: &LinkPrediction) -> std::cmp::Ordering {
    b.score
        .cmp(&a.score)
        .then_with(|| a.u.cmp(&b.u))
        .then_with(|| a.v.cmp(&b.v))
}

/// Non-adjacent pairs ranked by shared-neighbor count on the undirected view.
pub fn common_neighbors_prediction(g: &Graph, top_k: usize) -> Vec<LinkPrediction> {
    let n = g.node_count();
    let neighbors: Vec<Vec<usize>> = (0..n).map(|u| g.undirected_neighbors(u)).collect();
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for nb in &neighbors {
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                *counts.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut out: Vec<LinkPrediction> = counts
        .into_iter()
        .filter(|&((a, b), _)| neighbors[a].binary_search(&b).is_err())
        .map(|((a, b), score)| {
            let (u, v) = if g.nodes()[a] <= g.nodes()[b] { (a, b) } else { (b, a) };
            LinkPrediction {
                u: g.nodes()[u].clone(),
                v: g.nodes()[v].clone(),
                score,
            }
        })
        .collect();
    out.sort_by(prediction_order);
    out.truncate(top_k);
    out
}

/// Common-neighbor suggestions for a single node: nodes it is not linked to,
/// ranked by shared neighbors. The node itself is reported as `u`.
pub fn common_neighbors_for(g: &Graph, node: usize, top_k: usize) -> Vec<LinkPrediction> {
    let mine = g.undirected_neighbors(node);
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &m in &mine {
        for w in g.undirected_neighbors(m) {
            if w != node && mine.binary_search(&w).is_err() {
                *counts.entry(w).or_default() += 1;
            }
        }
    }
    let mut out: Vec<LinkPrediction> = counts
        .into_iter()
        .map(|(w, score)| LinkPrediction {
            u: g.nodes()[node].clone(),
            v: g.nodes()[w].clone(),
            score,
        })
        .collect();
    out.sort_by(prediction_order);
    out.truncate(top_k);
    out
}
