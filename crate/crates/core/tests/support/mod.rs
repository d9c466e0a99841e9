//! Brute-force reference implementations and synthetic fixtures shared by
//! the integration and acceptance tests.
#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod parsing;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use corpusforge_core::corpus::{EmbeddingSet, PaperRecord};
use corpusforge_core::graphs::{Direction, Graph};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, directed: bool) -> Graph {
    let mut g = Graph::new((0..n).map(|i| format!("n{i}")), directed).unwrap();
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.random_bool(p) {
                g.add_edge_idx(u, v, 1.0).unwrap();
            }
        }
    }
    g
}

/// `adj[u][v]` is true when an edge can be walked from `u` to `v`.
fn walk_matrix(g: &Graph, follow_both: bool) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for (u, v, _) in g.edges() {
        adj[u][v] = true;
        if !g.is_directed() || follow_both {
            adj[v][u] = true;
        }
    }
    adj
}

/// All-pairs hop counts by Floyd-Warshall; `d[s][t]` is the length of the
/// shortest walk from `s` to `t`.
fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<Option<usize>>> {
    let n = adj.len();
    let mut d: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Some(0) } else if adj[i][j] { Some(1) } else { None }).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

pub fn closeness_oracle(g: &Graph, dir: Direction) -> Vec<f64> {
    let n = g.node_count();
    let d = floyd_warshall(&walk_matrix(g, dir == Direction::Undirected));
    (0..n)
        .map(|u| {
            // distances toward u for In, away from u for Out
            let dists: Vec<usize> = (0..n)
                .filter(|&v| v != u)
                .filter_map(|v| match dir {
                    Direction::In => d[v][u],
                    Direction::Out | Direction::Undirected => d[u][v],
                })
                .collect();
            if dists.is_empty() {
                return 0.0;
            }
            let r = dists.len() as f64;
            let sum: usize = dists.iter().sum();
            (r / (n - 1) as f64) * (r / sum as f64)
        })
        .collect()
}

/// Every shortest path from `s` to `t`, listed node by node.
fn shortest_paths(adj: &[Vec<bool>], s: usize, t: usize, len: usize) -> Vec<Vec<usize>> {
    fn walk(adj: &[Vec<bool>], path: &mut Vec<usize>, t: usize, len: usize, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if path.len() - 1 == len {
            if last == t {
                out.push(path.clone());
            }
            return;
        }
        for next in 0..adj.len() {
            if adj[last][next] && !path.contains(&next) {
                path.push(next);
                walk(adj, path, t, len, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(adj, &mut vec![s], t, len, &mut out);
    out
}

pub fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    if n < 3 {
        return vec![0.0; n];
    }
    let adj = walk_matrix(g, false);
    let d = floyd_warshall(&adj);
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            let Some(len) = d[s][t] else { continue };
            if s == t {
                continue;
            }
            let paths = shortest_paths(&adj, s, t, len);
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count();
                score[v] += through as f64 / paths.len() as f64;
            }
        }
    }
    // ordered pairs: undirected graphs count each pair twice, which matches
    // halving both the sum and the (n-1)(n-2)/2 normalizer
    let norm = ((n - 1) * (n - 2)) as f64;
    score.iter().map(|x| x / norm).collect()
}

pub fn degree_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let adj = walk_matrix(g, true);
    (0..n)
        .map(|u| (0..n).filter(|&v| adj[u][v]).count() as f64 / (n - 1) as f64)
        .collect()
}

/// Uniform start vector projected onto the dominant eigenspace of the
/// symmetric adjacency, which is where power iteration from that start
/// converges.
pub fn eigenvector_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let adj = walk_matrix(g, true);
    let a = DMatrix::<f64>::from_fn(n, n, |i, j| if adj[i][j] { 1.0 } else { 0.0 });
    let eig = SymmetricEigen::new(a);
    let top: f64 = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = vec![1.0 / (n as f64).sqrt(); n];
    let mut x = vec![0.0; n];
    for (k, &val) in eig.eigenvalues.iter().enumerate() {
        if (val - top).abs() > 1e-9_f64 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let c: f64 = v.iter().zip(&start).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(v.iter()).for_each(|(xi, vi)| *xi += c * vi);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / norm).collect()
}

pub type WeightedPairs = BTreeMap<(String, String), usize>;

/// Projection edges from the shared-neighbor definition, enumerated pair by
/// pair. Returns (document pairs, word pairs) with shared counts.
pub fn projection_oracle(docs: &[(String, Vec<String>)]) -> (WeightedPairs, WeightedPairs) {
    let sets: Vec<BTreeSet<&String>> = docs.iter().map(|(_, w)| w.iter().collect()).collect();
    let mut dd = WeightedPairs::new();
    for i in 0..docs.len() {
        for j in i + 1..docs.len() {
            let shared = sets[i].intersection(&sets[j]).count();
            if shared > 0 {
                let (a, b) = ordered(&docs[i].0, &docs[j].0);
                dd.insert((a, b), shared);
            }
        }
    }
    let vocab: BTreeSet<&String> = sets.iter().flatten().copied().collect();
    let vocab: Vec<&String> = vocab.into_iter().collect();
    let mut ww = WeightedPairs::new();
    for i in 0..vocab.len() {
        for j in i + 1..vocab.len() {
            let both = sets
                .iter()
                .filter(|s| s.contains(vocab[i]) && s.contains(vocab[j]))
                .count();
            if both > 0 {
                ww.insert(ordered(vocab[i], vocab[j]), both);
            }
        }
    }
    (dd, ww)
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

pub fn graph_pairs(g: &Graph) -> WeightedPairs {
    g.edges()
        .into_iter()
        .map(|(u, v, w)| (ordered(&g.nodes()[u], &g.nodes()[v]), w as usize))
        .collect()
}

/// c-TF-IDF straight from the definition, one token at a time.
pub fn ctfidf_oracle(classes: &[Vec<String>]) -> Vec<HashMap<String, f64>> {
    let total_tokens: usize = classes.iter().map(Vec::len).sum();
    let avg = total_tokens as f64 / classes.len() as f64;
    classes
        .iter()
        .map(|class| {
            let mut out = HashMap::new();
            for t in class {
                if out.contains_key(t) {
                    continue;
                }
                let tf = class.iter().filter(|x| *x == t).count() as f64;
                let f = classes.iter().flatten().filter(|x| *x == t).count() as f64;
                out.insert(t.clone(), tf * (1.0 + avg / f).ln());
            }
            out
        })
        .collect()
}

/// Ids ordered by full-scan dot product, ties by id.
pub fn full_scan(query: &[f32], set: &EmbeddingSet) -> Vec<String> {
    let mut scored: Vec<(f64, &String)> = set
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let s: f64 = set.row(i).iter().zip(query).map(|(a, b)| *a as f64 * *b as f64).sum();
            (s, id)
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    scored.into_iter().map(|(_, id)| id.clone()).collect()
}

pub fn random_unit_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingSet {
    let normal = Normal::new(0.0f64, 1.0).unwrap();
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| (x / norm) as f32).collect()
        })
        .collect();
    let raw = EmbeddingSet::from_rows((0..n).map(|i| format!("p{i:04}")).collect(), &rows, false)
        .unwrap();
    corpusforge_core::vecsearch::normalize_rows(&raw).unwrap()
}

/// Gaussian blobs; returns points and the generating blob of each.
pub fn gaussian_blobs(
    rng: &mut ChaCha8Rng,
    centers: &[Vec<f64>],
    per_blob: usize,
    sigma: f64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut points = Vec::new();
    let mut truth = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            points.push(center.iter().map(|x| x + noise.sample(rng)).collect());
            truth.push(c);
        }
    }
    (points, truth)
}

/// Best fraction of points whose label matches the truth under any
/// one-to-one relabeling of clusters. Noise never matches.
pub fn permutation_agreement(labels: &[i64], truth: &[usize]) -> f64 {
    let clusters: Vec<i64> = labels.iter().copied().filter(|&l| l >= 0).collect::<BTreeSet<_>>().into_iter().collect();
    let classes = truth.iter().copied().max().map_or(0, |m| m + 1);
    let mut best = 0usize;
    let mut assignment = vec![usize::MAX; clusters.len()];
    fn search(
        i: usize,
        clusters: &[i64],
        classes: usize,
        used: &mut Vec<bool>,
        assignment: &mut Vec<usize>,
        labels: &[i64],
        truth: &[usize],
        best: &mut usize,
    ) {
        if i == clusters.len() {
            let hits = labels
                .iter()
                .zip(truth)
                .filter(|(l, t)| {
                    **l >= 0 && {
                        let ci = clusters.iter().position(|c| c == *l).unwrap();
                        assignment[ci] == **t
                    }
                })
                .count();
            *best = (*best).max(hits);
            return;
        }
        for c in 0..classes {
            if !used[c] {
                used[c] = true;
                assignment[i] = c;
                search(i + 1, clusters, classes, used, assignment, labels, truth, best);
                used[c] = false;
            }
        }
        // cluster left unmatched
        assignment[i] = usize::MAX;
        search(i + 1, clusters, classes, used, assignment, labels, truth, best);
    }
    let mut used = vec![false; classes];
    search(0, &clusters, classes, &mut used, &mut assignment, labels, truth, &mut best);
    best as f64 / labels.len() as f64
}

/// Perceptron on 2-D points; finds a separating line whenever one exists
/// with some margin, within the epoch budget.
pub fn linearly_separable(points: &[Vec<f64>], side: &[bool], epochs: usize) -> bool {
    let scale = points.iter().flatten().fold(1e-12f64, |m, v| m.max(v.abs()));
    let x: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().map(|v| v / scale).chain([1.0]).collect())
        .collect();
    let mut w = vec![0.0; x[0].len()];
    for _ in 0..epochs {
        let mut mistakes = 0;
        for (xi, &s) in x.iter().zip(side) {
            let y = if s { 1.0 } else { -1.0 };
            let act: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum();
            if y * act <= 0.0 {
                w.iter_mut().zip(xi).for_each(|(wi, v)| *wi += y * v);
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            return true;
        }
    }
    false
}

pub fn paper(id: &str, year: i32, tokens: &[&str]) -> PaperRecord {
    PaperRecord {
        id: id.to_string(),
        venue: "IPAC".to_string(),
        year,
        title: id.to_uppercase(),
        abstract_text: tokens.join(" "),
        references: Vec::new(),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Keyword score of every paper from the definition: for each keyword, the
/// best cosine between any vocabulary token within one edit and any token
/// of the paper, clamped to [0, 1]; multiplied over keywords.
pub fn keyword_oracle(
    keywords: &[&str],
    papers: &[PaperRecord],
    tokens: &[String],
    vectors: &[Vec<f64>],
) -> HashMap<String, f64> {
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    };
    papers
        .iter()
        .map(|p| {
            let score = keywords
                .iter()
                .map(|kw| {
                    let mut best = 0.0f64;
                    for (vi, v) in tokens.iter().enumerate() {
                        if edit_distance(kw, v) > 1 {
                            continue;
                        }
                        for t in &p.tokens {
                            if let Some(ti) = tokens.iter().position(|x| x == t) {
                                best = best.max(cos(&vectors[vi], &vectors[ti]));
                            }
                        }
                    }
                    best.clamp(0.0, 1.0)
                })
                .product();
            (p.id.clone(), score)
        })
        .collect()
}
