//! Class-based TF-IDF: each topic's concatenated tokens form one document.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub token: String,
    pub weight: f64,
}

/// Weight of every token in every class: `tf(t, c) · ln(1 + A / f(t))`,
/// where `A` is the mean token count per class and `f(t)` the token's total
/// count over all classes.
pub fn ctfidf_weights<S: AsRef<str>>(classes: &[Vec<S>]) -> Vec<BTreeMap<String, f64>> {
    let counts: Vec<HashMap<&str, usize>> = classes
        .iter()
        .map(|tokens| {
            let mut m = HashMap::new();
            for t in tokens {
                *m.entry(t.as_ref()).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut total: HashMap<&str, usize> = HashMap::new();
    for m in &counts {
        for (t, c) in m {
            *total.entry(t).or_insert(0) += c;
        }
    }
    let all: usize = total.values().sum();
    if classes.is_empty() {
        return Vec::new();
    }
    let avg = all as f64 / classes.len() as f64;
    counts
        .iter()
        .map(|m| {
            m.iter()
                .map(|(t, &tf)| {
                    let idf = (1.0 + avg / total[t] as f64).ln();
                    (t.to_string(), tf as f64 * idf)
                })
                .collect()
        })
        .collect()
}

/// Top `top_n` keywords per class, highest weight first, ties by token.
pub fn ctfidf_keywords<S: AsRef<str>>(classes: &[Vec<S>], top_n: usize) -> Vec<Vec<Keyword>> {
    ctfidf_weights(classes)
        .into_iter()
        .map(|weights| {
            let mut kw: Vec<Keyword> = weights
                .into_iter()
                .map(|(token, weight)| Keyword { token, weight })
                .collect();
            kw.sort_by(|a, b| {
                b.weight
                    .partial_cmp(&a.weight)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.token.cmp(&b.token))
            });
            kw.truncate(top_n);
            kw
        })
        .collect()
}
