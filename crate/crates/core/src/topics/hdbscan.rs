//! Density-based clustering over mutual reachability distance with
//! excess-of-mass cluster selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Label assigned to points outside every selected cluster.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
    /// Lets the root of the cluster tree be selected, so a single dense
    /// group comes back as one cluster instead of noise.
    pub allow_single_cluster: bool,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            min_cluster_size: 10,
            min_samples: 10,
            allow_single_cluster: true,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 || self.min_samples < 2 {
            return Err(Error::InvalidInput(
                "min_cluster_size and min_samples must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distance to the `min_samples`-th nearest point, counting the point itself
/// as the first.
fn core_distances(points: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    let k = min_samples.min(points.len());
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = points.iter().map(|p| dist(&points[i], p)).collect();
            let idx = k - 1;
            let (_, kth, _) = d.select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).unwrap());
            *kth
        })
        .collect()
}

/// Prim's algorithm on the dense mutual reachability graph.
fn mst(points: &[Vec<f64>], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let mr = dist(&points[current], &points[j]).max(core[current]).max(core[j]);
            if mr < best[j] {
                best[j] = mr;
                parent[j] = current;
            }
        }
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        current = next;
    }
    edges
}

struct SltNode {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

/// Single-linkage merges from sorted MST edges. Node `n + i` is the `i`-th
/// merge; nodes below `n` are points.
fn single_linkage(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Vec<SltNode> {
    edges.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then((a.0, a.1).cmp(&(b.0, b.1))));
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut nodes = Vec::with_capacity(n.saturating_sub(1));
    for (a, b, d) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let id = n + nodes.len();
        parent[ra] = id;
        parent[rb] = id;
        size[id] = size[ra] + size[rb];
        nodes.push(SltNode {
            left: ra,
            right: rb,
            distance: d,
            size: size[id],
        });
    }
    nodes
}

struct Condensed {
    birth: Vec<f64>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// `(cluster, lambda, size)` for every point or child cluster leaving a cluster.
    departures: Vec<(usize, f64, usize)>,
    /// Cluster each point last belonged to.
    home: Vec<usize>,
}

fn leaves(slt: &[SltNode], n: usize, node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let s = &slt[x - n];
            stack.push(s.right);
            stack.push(s.left);
        }
    }
}

fn condense(slt: &[SltNode], n: usize, min_cluster_size: usize) -> Condensed {
    let mut c = Condensed {
        birth: vec![0.0],
        parent: vec![None],
        children: vec![Vec::new()],
        departures: Vec::new(),
        home: vec![0; n],
    };
    let size_of = |x: usize| if x < n { 1 } else { slt[x - n].size };
    let root = n + slt.len() - 1;
    let mut stack = vec![(root, 0usize)];
    let mut buf = Vec::new();
    while let Some((node, cluster)) = stack.pop() {
        if node < n {
            c.home[node] = cluster;
            c.departures.push((cluster, f64::INFINITY, 1));
            continue;
        }
        let s = &slt[node - n];
        let lambda = if s.distance > 0.0 { 1.0 / s.distance } else { f64::INFINITY };
        let (l, r) = (s.left, s.right);
        let (big_l, big_r) = (size_of(l) >= min_cluster_size, size_of(r) >= min_cluster_size);
        match (big_l, big_r) {
            (true, true) => {
                for child in [l, r] {
                    let id = c.birth.len();
                    c.birth.push(lambda);
                    c.parent.push(Some(cluster));
                    c.children.push(Vec::new());
                    c.children[cluster].push(id);
                    c.departures.push((cluster, lambda, size_of(child)));
                    stack.push((child, id));
                }
            }
            (true, false) | (false, true) => {
                let (keep, drop) = if big_l { (l, r) } else { (r, l) };
                buf.clear();
                leaves(slt, n, drop, &mut buf);
                for &p in &buf {
                    c.home[p] = cluster;
                    c.departures.push((cluster, lambda, 1));
                }
                stack.push((keep, cluster));
            }
            (false, false) => {
                buf.clear();
                leaves(slt, n, node, &mut buf);
                for &p in &buf {
                    c.home[p] = cluster;
                    c.departures.push((cluster, lambda, 1));
                }
            }
        }
    }
    c
}

fn stabilities(c: &Condensed) -> Vec<f64> {
    let mut s = vec![0.0; c.birth.len()];
    for &(cluster, lambda, size) in &c.departures {
        let birth = c.birth[cluster];
        // points that never separate (zero distance) add nothing
        let span = if lambda == birth { 0.0 } else { lambda - birth };
        s[cluster] += span * size as f64;
    }
    s
}

/// Excess-of-mass selection. Children have larger ids than their parents,
/// so a reverse sweep visits every subtree before its root.
fn select(c: &Condensed, allow_root: bool) -> Vec<bool> {
    let k = c.birth.len();
    let mut stab = stabilities(c);
    let mut selected = vec![false; k];
    for id in (0..k).rev() {
        let child_sum: f64 = c.children[id].iter().map(|&ch| stab[ch]).sum();
        let is_root = id == 0;
        if is_root && !allow_root {
            break;
        }
        if c.children[id].is_empty() || stab[id] >= child_sum {
            selected[id] = true;
            let mut stack = c.children[id].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(&c.children[d]);
            }
        } else {
            stab[id] = child_sum;
        }
    }
    if !allow_root {
        selected[0] = false;
    }
    selected
}

/// Clusters `points`, returning one label per point: dense ids from 0 in
/// order of first appearance, or [`NOISE`].
pub fn hdbscan(points: &[Vec<f64>], params: &ClusterParams) -> Result<Vec<i64>> {
    params.validate()?;
    let n = points.len();
    if let Some(first) = points.first() {
        if points.iter().any(|p| p.len() != first.len()) {
            return Err(Error::InvalidInput("ragged input rows".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
    }
    if n < params.min_cluster_size || n < 2 {
        return Ok(vec![NOISE; n]);
    }
    let core = core_distances(points, params.min_samples);
    let slt = single_linkage(n, mst(points, &core));
    let condensed = condense(&slt, n, params.min_cluster_size);
    let selected = select(&condensed, params.allow_single_cluster);

    let mut cluster_label = vec![None; condensed.birth.len()];
    let mut next = 0i64;
    let mut labels = Vec::with_capacity(n);
    for p in 0..n {
        let mut at = Some(condensed.home[p]);
        let mut found = None;
        while let Some(cl) = at {
            if selected[cl] {
                found = Some(cl);
                break;
            }
            at = condensed.parent[cl];
        }
        labels.push(match found {
            Some(cl) => *cluster_label[cl].get_or_insert_with(|| {
                next += 1;
                next - 1
            }),
            None => NOISE,
        });
    }
    Ok(labels)
}
