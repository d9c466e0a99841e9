//! Dense-vector search over unit embeddings and word2vec keyword search.

mod word2vec;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use word2vec::{train_word2vec, W2VConfig, WordVectors};

use crate::corpus::{l2_norm, EmbeddingSet, PaperRecord, UNIT_NORM_TOL};
use crate::extract::{tokenize, TokenizerConfig};
use crate::matching::levenshtein_chars;
use crate::{Error, Result};

/// Maximum edit distance for keyword spelling variants.
pub const DEFAULT_VARIANT_DISTANCE: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub paper_id: String,
    pub score: f64,
}

/// Descending score, ascending id.
fn rank_order(a: &QueryResult, b: &QueryResult) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.paper_id.cmp(&b.paper_id))
}

fn top_k(mut results: Vec<QueryResult>, k: usize) -> Vec<QueryResult> {
    if k < results.len() {
        results.select_nth_unstable_by(k, rank_order);
        results.truncate(k);
    }
    results.sort_by(rank_order);
    results
}

pub(crate) fn dot_f64(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

pub fn normalize_rows(set: &EmbeddingSet) -> Result<EmbeddingSet> {
    let mut data = Vec::with_capacity(set.data().len());
    for (i, row) in set.rows().enumerate() {
        let norm = l2_norm(row);
        if norm == 0.0 {
            return Err(Error::ZeroRow(set.ids()[i].clone()));
        }
        data.extend(row.iter().map(|&x| (f64::from(x) / norm) as f32));
    }
    EmbeddingSet::new(set.ids().to_vec(), set.dim(), data, true)
}

pub fn normalize_vector(v: &[f32]) -> Option<Vec<f32>> {
    let norm = l2_norm(v);
    (norm > 0.0).then(|| v.iter().map(|&x| (f64::from(x) / norm) as f32).collect())
}

/// Top-`k` rows of a normalized set by dot product with a unit query.
pub fn semantic_topk(query: &[f32], set: &EmbeddingSet, k: usize) -> Result<Vec<QueryResult>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !set.is_normalized() {
        return Err(Error::InvalidInput("embedding set is not normalized".into()));
    }
    if query.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: query.len(),
        });
    }
    if (l2_norm(query) - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::InvalidInput("query vector is not unit length".into()));
    }
    let scored = set
        .rows()
        .zip(set.ids())
        .map(|(row, id)| QueryResult {
            paper_id: id.clone(),
            score: dot_f64(query, row),
        })
        .collect();
    Ok(top_k(scored, k))
}

/// Vocabulary tokens within `max_dist` edits of `keyword`, nearest first and
/// more frequent first among equals.
pub fn expand_keyword(keyword: &str, vectors: &WordVectors, max_dist: usize) -> Vec<String> {
    let key: Vec<char> = keyword.chars().collect();
    let mut hits: Vec<(usize, u64, &String)> = vectors
        .tokens()
        .iter()
        .zip(vectors.counts())
        .filter_map(|(tok, &count)| {
            // length difference alone already exceeds the budget
            let len = tok.chars().count();
            if len.abs_diff(key.len()) > max_dist {
                return None;
            }
            let tc: Vec<char> = tok.chars().collect();
            let d = levenshtein_chars(&key, &tc);
            (d <= max_dist).then_some((d, count, tok))
        })
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    hits.into_iter().map(|(_, _, t)| t.clone()).collect()
}

/// Word2vec keyword ranking with the default variant distance.
pub fn keyword_search(
    keywords: &[String],
    papers: &[PaperRecord],
    vectors: &WordVectors,
    k: usize,
) -> Result<Vec<QueryResult>> {
    keyword_search_with_distance(keywords, papers, vectors, k, DEFAULT_VARIANT_DISTANCE)
}

/// Each keyword scores a paper by its best cosine between any spelling
/// variant and any abstract token, clamped to `[0, 1]`; the paper score is
/// the product over keywords.
pub fn keyword_search_with_distance(
    keywords: &[String],
    papers: &[PaperRecord],
    vectors: &WordVectors,
    k: usize,
    max_dist: usize,
) -> Result<Vec<QueryResult>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if keywords.is_empty() {
        return Err(Error::InvalidInput("no keywords given".into()));
    }
    let mut variant_rows: Vec<Vec<usize>> = Vec::with_capacity(keywords.len());
    let mut unresolved = Vec::new();
    for kw in keywords {
        let variants: Vec<usize> = expand_keyword(&kw.to_lowercase(), vectors, max_dist)
            .iter()
            .filter_map(|t| vectors.index_of(t))
            .collect();
        if variants.is_empty() {
            unresolved.push(kw.clone());
        }
        variant_rows.push(variants);
    }
    if !unresolved.is_empty() {
        return Err(Error::UnresolvedKeywords(unresolved));
    }

    let scored = papers
        .iter()
        .map(|paper| {
            let mut rows: Vec<usize> = paper
                .tokens
                .iter()
                .filter_map(|t| vectors.index_of(t))
                .collect();
            rows.sort_unstable();
            rows.dedup();
            let score = variant_rows
                .iter()
                .map(|variants| best_keyword_cosine(variants, &rows, vectors))
                .product();
            QueryResult {
                paper_id: paper.id.clone(),
                score,
            }
        })
        .collect();
    Ok(top_k(scored, k))
}

fn best_keyword_cosine(variants: &[usize], tokens: &[usize], vectors: &WordVectors) -> f64 {
    let mut best = 0.0f64;
    for &v in variants {
        let qv = vectors.unit_row(v);
        for &t in tokens {
            best = best.max(dot_f64(qv, vectors.unit_row(t)));
        }
    }
    best.clamp(0.0, 1.0)
}

/// Mean word vector of the in-vocabulary tokens, scaled to unit length.
pub fn mean_token_vector(tokens: &[String], vectors: &WordVectors) -> Option<Vec<f32>> {
    let mut acc = vec![0.0f64; vectors.dim()];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = vectors.vector(t) {
            acc.iter_mut().zip(v).for_each(|(a, &x)| *a += f64::from(x));
            n += 1;
        }
    }
    if n == 0 {
        return None;
    }
    let mean: Vec<f32> = acc.iter().map(|a| (a / n as f64) as f32).collect();
    normalize_vector(&mean)
}

/// Unit document vectors built from word vectors, one row per paper.
///
/// Used when no external sentence embeddings are supplied. Papers without any
/// in-vocabulary token get the frequency-weighted centroid of the vocabulary.
pub fn document_vectors(papers: &[PaperRecord], vectors: &WordVectors) -> Result<EmbeddingSet> {
    let dim = vectors.dim();
    let mut centroid: Option<Vec<f32>> = None;
    let mut data = Vec::with_capacity(papers.len() * dim);
    for paper in papers {
        match mean_token_vector(&paper.tokens, vectors) {
            Some(v) => data.extend(v),
            None => {
                let c = centroid.get_or_insert_with(|| vocabulary_centroid(vectors));
                data.extend_from_slice(c);
            }
        }
    }
    let ids = papers.iter().map(|p| p.id.clone()).collect();
    EmbeddingSet::new(ids, dim, data, true)
}

fn vocabulary_centroid(vectors: &WordVectors) -> Vec<f32> {
    let dim = vectors.dim();
    let mut acc = vec![0.0f64; dim];
    for (i, &c) in vectors.counts().iter().enumerate() {
        for (a, &x) in acc.iter_mut().zip(vectors.row(i)) {
            *a += c as f64 * f64::from(x);
        }
    }
    let v: Vec<f32> = acc.iter().map(|&a| a as f32).collect();
    normalize_vector(&v).unwrap_or_else(|| {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        e
    })
}

/// Embeds free text with the mean-word-vector fallback.
pub fn embed_query(text: &str, vectors: &WordVectors, cfg: &TokenizerConfig) -> Result<Vec<f32>> {
    let tokens = tokenize(text, cfg);
    mean_token_vector(&tokens, vectors).ok_or_else(|| {
        Error::UnresolvedKeywords(if tokens.is_empty() {
            vec![text.to_string()]
        } else {
            tokens
        })
    })
}
