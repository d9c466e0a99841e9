//! Skip-gram with negative sampling.
//!
//! Training follows the reference word2vec recipe: frequent-word subsampling,
//! a window shrunk uniformly in `[1, window]` per center word, negatives drawn
//! from the unigram distribution raised to 0.75, and a learning rate decaying
//! linearly to 1% of its initial value. Center (input) vectors are kept as the
//! word embeddings.
//!
//! Training is single-threaded so that a fixed seed reproduces the vectors bit
//! for bit.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{load_embeddings, save_embeddings, EmbeddingSet};
use crate::{Error, Result};

const UNIGRAM_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f32 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct W2VConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub min_count: usize,
    pub epochs: usize,
    pub initial_lr: f32,
    pub subsample_t: f64,
    pub seed: u64,
}

impl Default for W2VConfig {
    fn default() -> Self {
        W2VConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            min_count: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample_t: 1e-3,
            seed: 1,
        }
    }
}

impl W2VConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.window > 0
            && self.negatives > 0
            && self.min_count > 0
            && self.epochs > 0
            && self.initial_lr > 0.0
            && self.subsample_t > 0.0;
        if !positive || self.dim < 2 {
            return Err(Error::InvalidInput(format!(
                "word2vec parameters must be positive with dim >= 2: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Trained word embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    dim: usize,
    matrix: Vec<f32>,
    /// Rows scaled to unit length; zero rows stay zero.
    unit: Vec<f32>,
}

impl WordVectors {
    pub fn new(tokens: Vec<String>, counts: Vec<u64>, dim: usize, matrix: Vec<f32>) -> Result<Self> {
        if counts.len() != tokens.len() || matrix.len() != tokens.len() * dim {
            return Err(Error::Format(format!(
                "{} tokens, {} counts, {} values for dim {dim}",
                tokens.len(),
                counts.len(),
                matrix.len()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite word vector".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.clone()));
            }
        }
        let mut unit = matrix.clone();
        for row in unit.chunks_exact_mut(dim.max(1)) {
            let norm = row.iter().map(|x| x * x).sum::<f32>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        Ok(WordVectors {
            tokens,
            index,
            counts,
            dim,
            matrix,
            unit,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn count(&self, token: &str) -> Option<u64> {
        self.index_of(token).map(|i| self.counts[i])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub fn unit_row(&self, i: usize) -> &[f32] {
        &self.unit[i * self.dim..(i + 1) * self.dim]
    }

    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f32> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Some(dot(self.unit_row(i), self.unit_row(j)))
    }

    /// Saves the matrix as `EMB1` (tokens in `<path>.ids`) and the token
    /// frequencies in `<path>.counts`, one integer per line.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let set = EmbeddingSet::new(self.tokens.clone(), self.dim, self.matrix.clone(), false)?;
        save_embeddings(&set, path)?;
        let counts_path = counts_path(path);
        let file = File::create(&counts_path).map_err(|e| Error::io(&counts_path, e))?;
        let mut out = BufWriter::new(file);
        for c in &self.counts {
            writeln!(out, "{c}").map_err(|e| Error::io(&counts_path, e))?;
        }
        out.flush().map_err(|e| Error::io(&counts_path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let set = load_embeddings(path)?;
        let counts_path = counts_path(path);
        let file = File::open(&counts_path).map_err(|e| Error::io(&counts_path, e))?;
        let mut counts = Vec::with_capacity(set.len());
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&counts_path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            counts.push(line.trim().parse().map_err(|e| Error::Parse {
                path: counts_path.clone(),
                line: i + 1,
                message: format!("{e}"),
            })?);
        }
        WordVectors::new(set.ids().to_vec(), counts, set.dim(), set.data().to_vec())
    }
}

fn counts_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".counts");
    PathBuf::from(s)
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f32) -> f32 {
    // saturate like the reference implementation's lookup table
    if x > 6.0 {
        1.0
    } else if x < -6.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Cumulative unigram^0.75 distribution sampled by binary search.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(UNIGRAM_POWER);
                acc
            })
            .collect();
        NegativeTable { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let r = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

pub fn train_word2vec(corpus: &[Vec<String>], cfg: &W2VConfig) -> Result<WordVectors> {
    cfg.validate()?;

    let mut raw_counts: HashMap<&str, u64> = HashMap::new();
    for sentence in corpus {
        for t in sentence {
            *raw_counts.entry(t.as_str()).or_default() += 1;
        }
    }
    // vocabulary order: frequency descending, then token, so the layout is seed-independent
    let mut vocab: Vec<(&str, u64)> = raw_counts
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_count as u64)
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    let counts: Vec<u64> = vocab.iter().map(|(_, c)| *c).collect();
    let total_words: u64 = counts.iter().sum();

    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();

    let threshold = cfg.subsample_t * total_words as f64;
    let keep_prob: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let c = c as f64;
            ((c / threshold).sqrt() + 1.0) * threshold / c
        })
        .collect();

    let dim = cfg.dim;
    let vocab_size = counts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f32> = (0..vocab_size * dim)
        .map(|_| (rng.random::<f32>() - 0.5) / dim as f32)
        .collect();
    let mut output = vec![0.0f32; vocab_size * dim];
    let negatives = NegativeTable::new(&counts);

    let schedule_total = (total_words * cfg.epochs as u64).max(1) as f32;
    let min_lr = cfg.initial_lr * MIN_LR_FRACTION;
    let mut processed: u64 = 0;
    let mut grad = vec![0.0f32; dim];
    let mut kept = Vec::new();

    for _ in 0..cfg.epochs {
        for sentence in &sentences {
            kept.clear();
            for &w in sentence {
                if keep_prob[w] >= 1.0 || rng.random::<f64>() < keep_prob[w] {
                    kept.push(w);
                }
            }
            processed += sentence.len() as u64;
            let progress = processed as f32 / schedule_total;
            let lr = (cfg.initial_lr * (1.0 - progress)).max(min_lr);

            for (pos, &center) in kept.iter().enumerate() {
                let span = rng.random_range(1..=cfg.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(kept.len() - 1);
                for (ctx_pos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    let center_vec = &mut input[center * dim..(center + 1) * dim];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = negatives.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out_vec = &mut output[target * dim..(target + 1) * dim];
                        let g = (label - sigmoid(dot(center_vec, out_vec))) * lr;
                        for d in 0..dim {
                            grad[d] += g * out_vec[d];
                            out_vec[d] += g * center_vec[d];
                        }
                    }
                    for d in 0..dim {
                        center_vec[d] += grad[d];
                    }
                }
            }
        }
    }

    let tokens = vocab.iter().map(|(t, _)| t.to_string()).collect();
    WordVectors::new(tokens, counts, dim, input)
}
