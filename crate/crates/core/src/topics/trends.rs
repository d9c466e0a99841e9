//! Per-year topic shares and 1D volume histograms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::reduce::{reduce_points, ReductionConfig};
use super::TopicModel;
use crate::corpus::{EmbeddingSet, PaperRecord};
use crate::{Error, Result};

/// Year × topic share matrix. `shares[i][j]` is the share of topic
/// `topic_ids[j]` in `years[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendTable {
    pub years: Vec<i32>,
    pub topic_ids: Vec<i64>,
    pub shares: Vec<Vec<f64>>,
    pub omitted_years: Vec<i32>,
}

impl TrendTable {
    /// Share series of one topic across the table's years.
    pub fn topic_series(&self, topic: i64) -> Option<Vec<f64>> {
        let j = self.topic_ids.iter().position(|&t| t == topic)?;
        Some(self.shares.iter().map(|row| row[j]).collect())
    }
}

pub fn topic_trends(
    model: &TopicModel,
    papers: &[PaperRecord],
    omit_years: &[i32],
    hide_topics: &[i64],
) -> Result<TrendTable> {
    let hidden: BTreeSet<i64> = hide_topics.iter().copied().collect();
    let topic_ids: Vec<i64> = (0..model.topic_count() as i64)
        .filter(|t| !hidden.contains(t))
        .collect();
    if topic_ids.is_empty() {
        return Err(Error::NoTopicsRemain);
    }
    let column: HashMap<i64, usize> = topic_ids.iter().enumerate().map(|(j, &t)| (t, j)).collect();
    let omitted: BTreeSet<i32> = omit_years.iter().copied().collect();
    let year_of: HashMap<&str, i32> = papers.iter().map(|p| (p.id.as_str(), p.year)).collect();

    let mut counts: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (id, &label) in model.ids.iter().zip(&model.labels) {
        let year = *year_of
            .get(id.as_str())
            .ok_or_else(|| Error::UnknownId(id.clone()))?;
        if omitted.contains(&year) {
            continue;
        }
        if let Some(&j) = column.get(&label) {
            counts.entry(year).or_insert_with(|| vec![0; topic_ids.len()])[j] += 1;
        }
    }

    let mut years = Vec::new();
    let mut shares = Vec::new();
    for (year, row) in counts {
        let total: usize = row.iter().sum();
        if total == 0 {
            continue;
        }
        years.push(year);
        shares.push(row.iter().map(|&c| c as f64 / total as f64).collect());
    }
    Ok(TrendTable {
        years,
        topic_ids,
        shares,
        omitted_years: omitted.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHistogram {
    /// `bins + 1` uniform edges over the projected range.
    pub edges: Vec<f64>,
    pub counts: BTreeMap<i32, Vec<usize>>,
}

/// Bins `values` uniformly over `[min, max]`, grouped by `years`. The last
/// bin is closed on the right; a zero-width range puts everything in bin 0.
pub fn histogram_by_year(values: &[f64], years: &[i32], bins: usize) -> Result<VolumeHistogram> {
    if bins < 2 {
        return Err(Error::InvalidInput("bins must be >= 2".into()));
    }
    if values.len() != years.len() {
        return Err(Error::InvalidInput("values and years differ in length".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite projection".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (&v, &year) in values.iter().zip(years) {
        let bin = if width > 0.0 {
            (((v - lo) / width).floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts.entry(year).or_insert_with(|| vec![0; bins])[bin] += 1;
    }
    Ok(VolumeHistogram { edges, counts })
}

/// Projects every paper's embedding to 1D and bins the projections per year.
pub fn volume_histogram(
    set: &EmbeddingSet,
    papers: &[PaperRecord],
    bins: usize,
    r: &ReductionConfig,
) -> Result<VolumeHistogram> {
    if bins < 2 {
        return Err(Error::InvalidInput("bins must be >= 2".into()));
    }
    let data = super::aligned_points(set, papers)?;
    let projected = reduce_points(&data, &r.with_dim(1))?;
    let values: Vec<f64> = projected.iter().map(|p| p[0]).collect();
    let years: Vec<i32> = papers.iter().map(|p| p.year).collect();
    histogram_by_year(&values, &years, bins)
}
