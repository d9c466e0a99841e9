//! Edit distances and fuzzy matching of reference titles to paper titles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::extract::extract_ref_title;

pub const DEFAULT_MATCH_THRESHOLD: u8 = 95;

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

fn lcs_len(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for ca in a {
        for (j, cb) in b.iter().enumerate() {
            curr[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                curr[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Insert/delete-only edit distance.
pub fn indel_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    a.len() + b.len() - 2 * lcs_len(&a, &b)
}

/// `round(100 * num / den)` with halves rounded up, in integer arithmetic.
fn percent_half_up(num: usize, den: usize) -> u8 {
    ((200 * num + den) / (2 * den)) as u8
}

pub fn indel_ratio(a: &str, b: &str) -> u8 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    indel_ratio_chars(&a, &b)
}

fn indel_ratio_chars(a: &[char], b: &[char]) -> u8 {
    let total = a.len() + b.len();
    if total == 0 {
        return 100;
    }
    let dist = total - 2 * lcs_len(a, b);
    percent_half_up(total - dist, total)
}

/// Lowercase, non-alphanumerics to spaces, sort tokens, join with one space.
pub fn sort_tokens(s: &str) -> String {
    let cleaned: String = s
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    let mut tokens: Vec<&str> = cleaned.split_whitespace().collect();
    tokens.sort_unstable();
    tokens.join(" ")
}

pub fn token_sort_ratio(a: &str, b: &str) -> u8 {
    indel_ratio(&sort_tokens(a), &sort_tokens(b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub citing_id: String,
    pub cited_id: String,
    pub score: u8,
    pub ambiguous: bool,
}

struct Candidate<'a> {
    paper: &'a PaperRecord,
    sorted: Vec<char>,
}

/// Matches every quoted reference title against the titles of the other
/// papers in the corpus.
///
/// The best-scoring candidate is kept when its token sort ratio reaches
/// `threshold`. Ties at the best score go to the earliest year, then the
/// smallest id, and mark the result ambiguous.
pub fn match_references(papers: &[PaperRecord], threshold: u8) -> Vec<MatchResult> {
    let candidates: Vec<Candidate> = papers
        .iter()
        .map(|p| Candidate {
            paper: p,
            sorted: sort_tokens(&p.title).chars().collect(),
        })
        .collect();
    let per_paper: Vec<Vec<MatchResult>> = papers
        .par_iter()
        .map(|citing| {
            citing
                .references
                .iter()
                .filter_map(|r| extract_ref_title(r))
                .filter_map(|title| {
                    let query: Vec<char> = sort_tokens(&title).chars().collect();
                    best_match(citing, &query, &candidates, threshold)
                })
                .collect()
        })
        .collect();
    per_paper.into_iter().flatten().collect()
}

fn best_match(
    citing: &PaperRecord,
    query: &[char],
    candidates: &[Candidate],
    threshold: u8,
) -> Option<MatchResult> {
    let mut best: Option<(u8, &PaperRecord)> = None;
    let mut ties = 0usize;
    for cand in candidates {
        if cand.paper.id == citing.id {
            continue;
        }
        let total = query.len() + cand.sorted.len();
        // the ratio can never exceed the one given by a full overlap of the shorter string
        if total > 0 {
            let bound = percent_half_up(2 * query.len().min(cand.sorted.len()), total);
            if bound < threshold {
                continue;
            }
        }
        let score = indel_ratio_chars(query, &cand.sorted);
        if score < threshold {
            continue;
        }
        match best {
            Some((s, _)) if score < s => {}
            Some((s, cur)) if score == s => {
                ties += 1;
                if (cand.paper.year, &cand.paper.id) < (cur.year, &cur.id) {
                    best = Some((score, cand.paper));
                }
            }
            _ => {
                best = Some((score, cand.paper));
                ties = 1;
            }
        }
    }
    best.map(|(score, cited)| MatchResult {
        citing_id: citing.id.clone(),
        cited_id: cited.id.clone(),
        score,
        ambiguous: ties >= 2,
    })
}
