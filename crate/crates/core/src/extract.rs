//! Title, abstract and reference extraction from PDF text blocks.

use std::collections::HashSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::{parse_paper_id, PaperBlocks, PaperRecord, TextBlock};
use crate::{Error, Result};

/// Abstracts whose English-word ratio falls below this are dropped.
pub const MIN_ENGLISH_RATIO: f64 = 0.5;
/// Shorter uppercase blocks are usually running headers or page furniture.
pub const MIN_TITLE_LEN: usize = 8;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

static ABSTRACT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)Abstract(.*?)(?:INTRODUCTION)").unwrap());
static REF_NUMBER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\d+\]").unwrap());
static QUOTED_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?s)["“](.*?)["”]"#).unwrap());
static WORD_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}]+").unwrap());

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn read_word_list(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub min_token_len: usize,
    pub strip_punctuation: bool,
    pub stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            min_token_len: 2,
            strip_punctuation: true,
            stopwords: default_stopwords(),
        }
    }
}

impl TokenizerConfig {
    pub fn with_stopword_file(mut self, path: impl AsRef<Path>) -> Result<Self> {
        self.stopwords = read_word_list(path.as_ref())?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_token_len == 0 {
            return Err(Error::InvalidInput("min_token_len must be >= 1".into()));
        }
        Ok(())
    }
}

/// The stopword list shipped with the crate.
pub fn default_stopwords() -> HashSet<String> {
    parse_word_list(DEFAULT_STOPWORDS)
}

#[derive(Debug, Clone)]
pub struct EnglishDictionary {
    words: HashSet<String>,
}

impl EnglishDictionary {
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::InvalidInput("English dictionary is empty".into()));
        }
        Ok(EnglishDictionary { words })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_words(read_word_list(path.as_ref())?)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

fn is_all_uppercase(text: &str) -> bool {
    let mut any_alpha = false;
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        any_alpha = true;
        if c.is_lowercase() {
            return false;
        }
    }
    any_alpha
}

/// First block whose letters are all uppercase (at least one letter, at least
/// [`MIN_TITLE_LEN`] characters).
pub fn extract_title(blocks: &[TextBlock]) -> Option<String> {
    blocks
        .iter()
        .map(|b| b.text.trim())
        .find(|t| t.chars().count() >= MIN_TITLE_LEN && is_all_uppercase(t))
        .map(str::to_string)
}

/// Text between the first `Abstract` and the following `INTRODUCTION`.
pub fn extract_abstract(full_text: &str) -> Option<String> {
    ABSTRACT_RE
        .captures(full_text)
        .map(|c| c[1].trim().to_string())
}

pub fn english_ratio(text: &str, dict: &EnglishDictionary) -> f64 {
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    if words.is_empty() {
        return 0.0;
    }
    let hits = words.iter().filter(|w| dict.contains(w)).count();
    hits as f64 / words.len() as f64
}

pub fn passes_english_gate(text: &str, dict: &EnglishDictionary) -> bool {
    english_ratio(text, dict) >= MIN_ENGLISH_RATIO
}

pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let raw: Vec<&str> = if cfg.strip_punctuation {
        WORD_RE.find_iter(text).map(|m| m.as_str()).collect()
    } else {
        text.split_whitespace().collect()
    };
    raw.into_iter()
        .filter(|t| t.chars().count() >= cfg.min_token_len)
        .filter_map(|t| {
            let lower = t.to_lowercase();
            if cfg.stopwords.contains(&lower) {
                None
            } else if cfg.lowercase {
                Some(lower)
            } else {
                Some(t.to_string())
            }
        })
        .collect()
}

/// Numbered references following the last `REFERENCE` keyword.
pub fn extract_references(full_text: &str) -> Vec<String> {
    let Some(start) = full_text.rfind("REFERENCE") else {
        return Vec::new();
    };
    let tail = &full_text[start..];
    // text before the first marker is the heading itself
    REF_NUMBER_RE
        .split(tail)
        .skip(1)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// First quoted span of a reference; straight and typographic quotes both count.
pub fn extract_ref_title(reference: &str) -> Option<String> {
    QUOTED_RE.captures(reference).and_then(|c| {
        let title = c[1].trim().trim_end_matches(',').trim();
        (!title.is_empty()).then(|| title.to_string())
    })
}

/// Why a paper was left out of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    NoTitle,
    NoAbstract,
    NotEnglish,
    NoVenueYear,
}

#[derive(Debug, Clone, Default)]
pub struct ExtractSummary {
    pub kept: usize,
    pub skipped: Vec<(String, SkipReason)>,
}

/// Turns block files into paper records.
///
/// Papers without a title or an abstract are skipped, as are abstracts that
/// fail the English-ratio gate when a dictionary is supplied. Venue and year
/// come from the block record when present, else from the id.
pub fn build_records(
    papers: &[PaperBlocks],
    dict: Option<&EnglishDictionary>,
    cfg: &TokenizerConfig,
) -> (Vec<PaperRecord>, ExtractSummary) {
    let mut summary = ExtractSummary::default();
    let mut records = Vec::new();
    for paper in papers {
        let skip = |reason| (paper.id.clone(), reason);
        let from_id = parse_paper_id(&paper.id);
        let venue = paper
            .venue
            .clone()
            .or_else(|| from_id.as_ref().map(|(v, _)| v.clone()));
        let year = paper.year.or_else(|| from_id.as_ref().map(|(_, y)| *y));
        let (Some(venue), Some(year)) = (venue, year) else {
            summary.skipped.push(skip(SkipReason::NoVenueYear));
            continue;
        };
        let Some(title) = extract_title(&paper.blocks) else {
            summary.skipped.push(skip(SkipReason::NoTitle));
            continue;
        };
        let full_text = paper.full_text();
        let Some(abstract_text) = extract_abstract(&full_text) else {
            summary.skipped.push(skip(SkipReason::NoAbstract));
            continue;
        };
        if let Some(dict) = dict {
            if !passes_english_gate(&abstract_text, dict) {
                summary.skipped.push(skip(SkipReason::NotEnglish));
                continue;
            }
        }
        let tokens = tokenize(&abstract_text, cfg);
        records.push(PaperRecord {
            id: paper.id.clone(),
            venue,
            year,
            title,
            abstract_text,
            references: extract_references(&full_text),
            tokens,
        });
    }
    summary.kept = records.len();
    (records, summary)
}
