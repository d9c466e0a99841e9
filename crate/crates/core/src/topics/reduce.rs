//! PCA and UMAP-style reduction of embedding matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMethod {
    Pca,
    #[default]
    Umap,
}

impl std::str::FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(ReductionMethod::Pca),
            "umap" => Ok(ReductionMethod::Umap),
            other => Err(Error::InvalidInput(format!("unknown reduction method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReductionConfig {
    pub method: ReductionMethod,
    pub target_dim: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub seed: u64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            method: ReductionMethod::Umap,
            target_dim: 5,
            n_neighbors: 15,
            min_dist: 0.1,
            n_epochs: 200,
            seed: 42,
        }
    }
}

impl ReductionConfig {
    pub fn with_dim(&self, target_dim: usize) -> Self {
        ReductionConfig {
            target_dim,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_dim == 0 {
            return Err(Error::InvalidInput("target_dim must be >= 1".into()));
        }
        if self.n_neighbors < 2 {
            return Err(Error::InvalidInput("n_neighbors must be >= 2".into()));
        }
        if self.n_epochs == 0 || self.min_dist.is_nan() || self.min_dist < 0.0 {
            return Err(Error::InvalidInput(
                "n_epochs must be positive and min_dist non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major `n × dim` matrix of `f64`.
pub type Points = Vec<Vec<f64>>;

pub fn reduce(set: &EmbeddingSet, cfg: &ReductionConfig) -> Result<Points> {
    reduce_points(&set.to_f64_rows(), cfg)
}

pub fn reduce_points(data: &[Vec<f64>], cfg: &ReductionConfig) -> Result<Points> {
    cfg.validate()?;
    match cfg.method {
        ReductionMethod::Pca => {
            if data.is_empty() {
                return Err(Error::InvalidInput("PCA needs at least one point".into()));
            }
            Ok(Pca::fit(data, cfg.target_dim)?.transform(data))
        }
        ReductionMethod::Umap => umap(data, cfg),
    }
}

/// Principal components of mean-centered data.
#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `k` unit-length principal axes, largest variance first. Axes beyond
    /// the data rank are zero.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the scatter matrix `XᵀX` (squared singular values).
    pub explained: Vec<f64>,
}

impl Pca {
    pub fn fit(data: &[Vec<f64>], k: usize) -> Result<Self> {
        let n = data.len();
        let dim = data.first().map_or(0, Vec::len);
        if n == 0 || dim == 0 {
            return Err(Error::InvalidInput("PCA needs non-empty data".into()));
        }
        if data.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("ragged input rows".into()));
        }
        let mut mean = vec![0.0; dim];
        for row in data {
            mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let centered = DMatrix::from_fn(n, dim, |i, j| data[i][j] - mean[j]);

        // eigen-decompose the smaller of XᵀX (dim²) and XXᵀ (n²)
        let (axes, values): (Vec<Vec<f64>>, Vec<f64>) = if dim <= n {
            let scatter = centered.transpose() * &centered;
            let eig = SymmetricEigen::new(scatter);
            sorted_pairs(&eig)
                .into_iter()
                .map(|(val, i)| (eig.eigenvectors.column(i).iter().copied().collect(), val))
                .unzip()
        } else {
            let gram = &centered * centered.transpose();
            let eig = SymmetricEigen::new(gram);
            sorted_pairs(&eig)
                .into_iter()
                .map(|(val, i)| {
                    let u = eig.eigenvectors.column(i);
                    let mut axis: Vec<f64> = (centered.transpose() * u).iter().copied().collect();
                    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        axis.iter_mut().for_each(|x| *x /= norm);
                    } else {
                        axis.iter_mut().for_each(|x| *x = 0.0);
                    }
                    (axis, val)
                })
                .unzip()
        };

        let scale = values.first().copied().unwrap_or(0.0).abs().max(1.0);
        let mut components = Vec::with_capacity(k);
        let mut explained = Vec::with_capacity(k);
        for (mut axis, val) in axes.into_iter().zip(values).take(k) {
            if val <= 1e-12 * scale {
                axis.iter_mut().for_each(|x| *x = 0.0);
            }
            orient(&mut axis);
            components.push(axis);
            explained.push(val.max(0.0));
        }
        while components.len() < k {
            components.push(vec![0.0; dim]);
            explained.push(0.0);
        }
        Ok(Pca {
            mean,
            components,
            explained,
        })
    }

    pub fn transform(&self, data: &[Vec<f64>]) -> Points {
        data.iter()
            .map(|row| {
                self.components
                    .iter()
                    .map(|axis| {
                        row.iter()
                            .zip(&self.mean)
                            .zip(axis)
                            .map(|((x, m), a)| (x - m) * a)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

fn sorted_pairs(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<(f64, usize)> {
    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    pairs
}

/// Flips an axis so its largest-magnitude entry is positive.
fn orient(axis: &mut [f64]) {
    let pivot = axis
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, x)| if x.abs() > best.1.abs() + 1e-12 { (i, x) } else { best });
    if pivot.1 < 0.0 {
        axis.iter_mut().for_each(|x| *x = -*x);
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest neighbors of every point (self excluded), nearest first,
/// ties by index.
pub(crate) fn knn(data: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    (0..data.len())
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(usize, f64)> = data
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, row)| (j, sq_dist(&data[i], row).sqrt()))
                .collect();
            let cmp = |a: &(usize, f64), b: &(usize, f64)| {
                a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0))
            };
            if k < d.len() {
                d.select_nth_unstable_by(k, cmp);
                d.truncate(k);
            }
            d.sort_by(cmp);
            d
        })
        .collect()
}

const SMOOTH_K_TOLERANCE: f64 = 1e-5;
const MIN_K_DIST_SCALE: f64 = 1e-3;

/// Per-point `(rho, sigma)` such that `Σ exp(-(d - rho)/sigma) = log2(k)`.
fn smooth_knn(neighbors: &[Vec<(usize, f64)>], n_neighbors: usize) -> Vec<(f64, f64)> {
    let target = (n_neighbors as f64).log2();
    let mean_all: f64 = {
        let all: Vec<f64> = neighbors.iter().flatten().map(|e| e.1).collect();
        if all.is_empty() {
            0.0
        } else {
            all.iter().sum::<f64>() / all.len() as f64
        }
    };
    neighbors
        .iter()
        .map(|nb| {
            let rho = nb.iter().map(|e| e.1).find(|&d| d > 0.0).unwrap_or(0.0);
            let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
            for _ in 0..64 {
                let psum: f64 = nb
                    .iter()
                    .map(|e| {
                        let d = e.1 - rho;
                        if d > 0.0 {
                            (-d / mid).exp()
                        } else {
                            1.0
                        }
                    })
                    .sum();
                if (psum - target).abs() < SMOOTH_K_TOLERANCE {
                    break;
                }
                if psum > target {
                    hi = mid;
                    mid = (lo + hi) / 2.0;
                } else {
                    lo = mid;
                    mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
                }
            }
            let mean_i = if nb.is_empty() {
                0.0
            } else {
                nb.iter().map(|e| e.1).sum::<f64>() / nb.len() as f64
            };
            let floor = if rho > 0.0 {
                MIN_K_DIST_SCALE * mean_i
            } else {
                MIN_K_DIST_SCALE * mean_all
            };
            (rho, mid.max(floor))
        })
        .collect()
}

/// Fits `1 / (1 + a x^(2b))` to the target membership curve implied by
/// `min_dist` and `spread`, by Gauss-Newton with step halving.
pub fn fit_ab(min_dist: f64, spread: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            if x < min_dist {
                1.0
            } else {
                (-(x - min_dist) / spread).exp()
            }
        })
        .collect();
    let loss = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let f = 1.0 / (1.0 + a * x.powf(2.0 * b));
                (f - y) * (f - y)
            })
            .sum()
    };
    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut current = loss(a, b);
    for _ in 0..200 {
        // normal equations of the 2-parameter least squares
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue;
            }
            let p = x.powf(2.0 * b);
            let denom = 1.0 + a * p;
            let f = 1.0 / denom;
            let r = f - y;
            let da = -p / (denom * denom);
            let db = -a * p * 2.0 * x.ln() / (denom * denom);
            jtj[0][0] += da * da;
            jtj[0][1] += da * db;
            jtj[1][1] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        jtj[1][0] = jtj[0][1];
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step_a = (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let step_b = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let (na, nb) = (a - t * step_a, b - t * step_b);
            if na > 0.0 && nb > 0.0 {
                let l = loss(na, nb);
                if l < current {
                    a = na;
                    b = nb;
                    improved = current - l > 1e-15;
                    current = l;
                    break;
                }
            }
            t /= 2.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

const UMAP_SPREAD: f64 = 1.0;
const UMAP_NEGATIVE_RATE: usize = 5;
const UMAP_REPULSION: f64 = 1.0;
const UMAP_INITIAL_ALPHA: f64 = 1.0;
const UMAP_INIT_EXTENT: f64 = 10.0;
const GRAD_CLIP: f64 = 4.0;

struct FuzzyEdge {
    head: usize,
    tail: usize,
    weight: f64,
}

/// Symmetrized fuzzy k-NN graph: `w = a + b - a·b` over both directions.
fn fuzzy_graph(data: &[Vec<f64>], n_neighbors: usize) -> Vec<FuzzyEdge> {
    let neighbors = knn(data, n_neighbors - 1);
    let params = smooth_knn(&neighbors, n_neighbors);
    let mut directed: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for (i, nb) in neighbors.iter().enumerate() {
        let (rho, sigma) = params[i];
        for &(j, d) in nb {
            let w = if d - rho <= 0.0 {
                1.0
            } else {
                (-(d - rho) / sigma).exp()
            };
            directed.insert((i, j), w);
        }
    }
    let mut edges = Vec::with_capacity(directed.len() * 2);
    let mut seen = std::collections::BTreeSet::new();
    for (&(i, j), &w_ij) in &directed {
        let key = (i.min(j), i.max(j));
        if !seen.insert(key) {
            continue;
        }
        let w_ji = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let weight = w_ij + w_ji - w_ij * w_ji;
        if weight > 0.0 {
            edges.push(FuzzyEdge { head: key.0, tail: key.1, weight });
            edges.push(FuzzyEdge { head: key.1, tail: key.0, weight });
        }
    }
    edges
}

fn umap_init(data: &[Vec<f64>], dim: usize) -> Result<Points> {
    let mut y = Pca::fit(data, dim)?.transform(data);
    let max_abs = y.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs > 0.0 {
        let s = UMAP_INIT_EXTENT / max_abs;
        y.iter_mut().flatten().for_each(|v| *v *= s);
    }
    Ok(y)
}

fn clip(x: f64) -> f64 {
    x.clamp(-GRAD_CLIP, GRAD_CLIP)
}

/// UMAP-style embedding: fuzzy k-NN graph, PCA initialisation, then epochs
/// of edge-sampled attraction with negative-sampled repulsion.
///
/// Runs single-threaded after the neighbor search, so a fixed seed gives the
/// same layout.
fn umap(data: &[Vec<f64>], cfg: &ReductionConfig) -> Result<Points> {
    let n = data.len();
    if n < cfg.n_neighbors + 1 {
        return Err(Error::InvalidInput(format!(
            "UMAP with n_neighbors={} needs at least {} points, got {n}",
            cfg.n_neighbors,
            cfg.n_neighbors + 1
        )));
    }
    let dim = cfg.target_dim;
    let (a, b) = fit_ab(cfg.min_dist, UMAP_SPREAD);

    let mut edges = fuzzy_graph(data, cfg.n_neighbors);
    let max_w = edges.iter().fold(0.0f64, |m, e| m.max(e.weight));
    let cutoff = max_w / cfg.n_epochs as f64;
    edges.retain(|e| e.weight >= cutoff);

    let epochs_per_sample: Vec<f64> = edges.iter().map(|e| max_w / e.weight).collect();
    let epochs_per_negative: Vec<f64> = epochs_per_sample
        .iter()
        .map(|e| e / UMAP_NEGATIVE_RATE as f64)
        .collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = epochs_per_negative.clone();

    let mut y = umap_init(data, dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut delta = vec![0.0f64; dim];

    for epoch in 0..cfg.n_epochs {
        let alpha = UMAP_INITIAL_ALPHA * (1.0 - epoch as f64 / cfg.n_epochs as f64);
        let epoch_f = epoch as f64;
        for (e, edge) in edges.iter().enumerate() {
            if next_sample[e] > epoch_f {
                continue;
            }
            let (i, j) = (edge.head, edge.tail);
            let d2 = sq_dist(&y[i], &y[j]);
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for d in 0..dim {
                delta[d] = clip(coeff * (y[i][d] - y[j][d])) * alpha;
            }
            for d in 0..dim {
                y[i][d] += delta[d];
                y[j][d] -= delta[d];
            }
            next_sample[e] += epochs_per_sample[e];

            let n_neg = ((epoch_f - next_negative[e]) / epochs_per_negative[e]).floor().max(0.0)
                as usize;
            for _ in 0..n_neg {
                let k = rng.random_range(0..n);
                if k == i {
                    continue;
                }
                let d2 = sq_dist(&y[i], &y[k]);
                if d2 <= 0.0 {
                    continue;
                }
                let coeff =
                    2.0 * UMAP_REPULSION * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0));
                for d in 0..dim {
                    delta[d] = clip(coeff * (y[i][d] - y[k][d])) * alpha;
                }
                for d in 0..dim {
                    y[i][d] += delta[d];
                }
            }
            next_negative[e] += n_neg as f64 * epochs_per_negative[e];
        }
    }
    Ok(y)
}
