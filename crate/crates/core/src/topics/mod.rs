//! Topic modeling: reduce embeddings, cluster them, and label clusters with
//! class-based TF-IDF keywords.

mod ctfidf;
mod hdbscan;
mod reduce;
mod trends;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use ctfidf::{ctfidf_keywords, ctfidf_weights, Keyword};
pub use hdbscan::{hdbscan, ClusterParams, NOISE};
pub use reduce::{fit_ab, reduce, reduce_points, Pca, Points, ReductionConfig, ReductionMethod};
pub use trends::{histogram_by_year, topic_trends, volume_histogram, TrendTable, VolumeHistogram};

use crate::corpus::{EmbeddingSet, PaperRecord};
use crate::{Error, Result};

pub const MAP_DIM: usize = 2;
pub const DEFAULT_TOP_N: usize = 10;

/// Fitted topic assignment. Topic ids are dense from 0 and ordered by size,
/// largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub ids: Vec<String>,
    pub labels: Vec<i64>,
    pub keywords: Vec<Vec<Keyword>>,
    pub coords2d: Vec<[f64; 2]>,
    pub topic_sizes: Vec<usize>,
}

impl TopicModel {
    pub fn topic_count(&self) -> usize {
        self.topic_sizes.len()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn label_of(&self, id: &str) -> Option<i64> {
        self.ids.iter().position(|x| x == id).map(|i| self.labels[i])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.labels.len() != n || self.coords2d.len() != n {
            return Err(Error::Format("topic model arrays differ in length".into()));
        }
        let t = self.topic_sizes.len();
        if self.keywords.len() != t {
            return Err(Error::Format("keyword lists do not match topic count".into()));
        }
        let mut sizes = vec![0usize; t];
        for &l in &self.labels {
            if l == NOISE {
                continue;
            }
            if l < 0 || l as usize >= t {
                return Err(Error::Format(format!("label {l} outside 0..{t}")));
            }
            sizes[l as usize] += 1;
        }
        if sizes != self.topic_sizes {
            return Err(Error::Format("topic sizes disagree with labels".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("topic model always serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TopicModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }
}

/// Embedding rows in paper order, as `f64`.
pub(crate) fn aligned_points(set: &EmbeddingSet, papers: &[PaperRecord]) -> Result<Points> {
    papers
        .iter()
        .map(|p| {
            set.index_of(&p.id)
                .map(|i| set.row(i).iter().map(|&x| x as f64).collect())
                .ok_or_else(|| Error::UnknownId(p.id.clone()))
        })
        .collect()
}

/// Renumbers cluster labels so topic 0 is the largest (ties by first member).
fn order_by_size(labels: &[i64]) -> (Vec<i64>, Vec<usize>) {
    let k = labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
    let mut sizes = vec![0usize; k];
    let mut first = vec![usize::MAX; k];
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            sizes[l as usize] += 1;
            first[l as usize] = first[l as usize].min(i);
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(sizes[c]), first[c]));
    let mut remap = vec![0i64; k];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new as i64;
    }
    let relabeled = labels
        .iter()
        .map(|&l| if l >= 0 { remap[l as usize] } else { NOISE })
        .collect();
    (relabeled, order.iter().map(|&c| sizes[c]).collect())
}

/// Clusters papers in an `r.target_dim`-dimensional reduction, labels each
/// topic with its top `top_n` c-TF-IDF tokens, and lays papers out in 2D
/// with a separate reduction.
pub fn fit_topics(
    set: &EmbeddingSet,
    papers: &[PaperRecord],
    r: &ReductionConfig,
    c: &ClusterParams,
    top_n: usize,
) -> Result<TopicModel> {
    r.validate()?;
    c.validate()?;
    let data = aligned_points(set, papers)?;
    let reduced = reduce_points(&data, r)?;
    let (labels, topic_sizes) = order_by_size(&hdbscan(&reduced, c)?);

    let mut classes: Vec<Vec<&str>> = vec![Vec::new(); topic_sizes.len()];
    for (paper, &l) in papers.iter().zip(&labels) {
        if l >= 0 {
            classes[l as usize].extend(paper.tokens.iter().map(String::as_str));
        }
    }
    let keywords = ctfidf_keywords(&classes, top_n);

    let map = if r.target_dim == MAP_DIM {
        reduced
    } else {
        reduce_points(&data, &r.with_dim(MAP_DIM))?
    };
    let model = TopicModel {
        ids: papers.iter().map(|p| p.id.clone()).collect(),
        labels,
        keywords,
        coords2d: map.iter().map(|p| [p[0], p[1]]).collect(),
        topic_sizes,
    };
    debug_assert!(model.validate().is_ok());
    Ok(model)
}
