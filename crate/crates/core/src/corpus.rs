//! Paper records, text blocks and embedding matrices, with their file formats.
//!
//! Corpora are JSON Lines, one [`PaperRecord`] per line. Embedding matrices use
//! the `EMB1` binary layout:
//!
//! ```text
//! "EMB1" | count: u32 LE | dim: u32 LE | normalized: u8 | count*dim f32 LE (row-major)
//! ```
//!
//! with the row ids stored next to it in `<path>.ids`, one JSON string per line.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EMB_MAGIC: &[u8; 4] = b"EMB1";
const EMB_HEADER_LEN: usize = 4 + 4 + 4 + 1;
pub const MIN_YEAR: i32 = 1990;
pub const MAX_YEAR: i32 = 2100;
/// Tolerance on the L2 norm of rows in a normalized set.
pub const UNIT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBlock {
    pub page: u32,
    /// `(x0, y0, x1, y1)` in PDF points.
    pub bbox: [f64; 4],
    pub text: String,
}

impl TextBlock {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let [x0, y0, x1, y1] = self.bbox;
        if !(x0 <= x1 && y0 <= y1) {
            return Err(format!("degenerate bbox {:?}", self.bbox));
        }
        if self.text.trim().is_empty() {
            return Err("empty block text".into());
        }
        Ok(())
    }
}

/// All text blocks extracted from one PDF, in reading order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperBlocks {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    pub blocks: Vec<TextBlock>,
}

impl PaperBlocks {
    /// Block texts joined with single spaces.
    pub fn full_text(&self) -> String {
        self.blocks
            .iter()
            .map(|b| b.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub venue: String,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub tokens: Vec<String>,
}

impl PaperRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(format!(
                "year {} outside [{MIN_YEAR}, {MAX_YEAR}]",
                self.year
            ));
        }
        Ok(())
    }
}

/// Splits an id of the form `<venue>-<year>-<code>` into venue and year.
pub fn parse_paper_id(id: &str) -> Option<(String, i32)> {
    let mut parts = id.splitn(3, '-');
    let venue = parts.next()?;
    let year = parts.next()?.parse().ok()?;
    parts.next()?;
    if venue.is_empty() {
        return None;
    }
    Some((venue.to_string(), year))
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, Result<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let owned: PathBuf = path.to_path_buf();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, line)| (i + 1, line.map_err(|e| Error::io(&owned, e)))))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<PaperRecord>> {
    let path = path.as_ref();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line_no, line) in open_lines(path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let record: PaperRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        record.validate().map_err(parse_err)?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn save_corpus(records: &[PaperRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("paper records always serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_blocks(path: impl AsRef<Path>) -> Result<Vec<PaperBlocks>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (line_no, line) in open_lines(path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let paper: PaperBlocks =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        for block in &paper.blocks {
            block.validate().map_err(parse_err)?;
        }
        if !seen.insert(paper.id.clone()) {
            return Err(Error::DuplicateId(paper.id));
        }
        out.push(paper);
    }
    Ok(out)
}

pub fn save_blocks(papers: &[PaperBlocks], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for paper in papers {
        let line = serde_json::to_string(paper).expect("blocks always serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Dense row-per-item matrix of `f32` with an id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
    normalized: bool,
}

impl EmbeddingSet {
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>, normalized: bool) -> Result<Self> {
        if dim == 0 && !ids.is_empty() {
            return Err(Error::Format("dim must be positive".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::Format(format!(
                "{} values do not fill {} rows of dim {dim}",
                data.len(),
                ids.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        let set = EmbeddingSet {
            ids,
            dim,
            data,
            normalized,
        };
        if normalized {
            for (i, row) in set.rows().enumerate() {
                let norm = l2_norm(row);
                if (norm - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(Error::Format(format!(
                        "row {:?} flagged normalized but has norm {norm}",
                        set.ids[i]
                    )));
                }
            }
        }
        Ok(set)
    }

    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f32>], normalized: bool) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        if rows.len() != ids.len() {
            return Err(Error::Format(format!(
                "{} ids for {} rows",
                ids.len(),
                rows.len()
            )));
        }
        Self::new(ids, dim, rows.concat(), normalized)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        // chunks_exact panics on a zero chunk size
        let dim = self.dim.max(1);
        self.data.chunks_exact(dim).take(self.ids.len())
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Rows as `f64` vectors, in id order.
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|r| r.iter().map(|&x| f64::from(x)).collect())
            .collect()
    }
}

pub(crate) fn l2_norm(row: &[f32]) -> f64 {
    row.iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt()
}

pub fn ids_manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let count = u32::try_from(set.len())
        .map_err(|_| Error::Format(format!("row count {} exceeds u32", set.len())))?;
    let dim = u32::try_from(set.dim())
        .map_err(|_| Error::Format(format!("dim {} exceeds u32", set.dim())))?;

    let mut bytes = Vec::with_capacity(EMB_HEADER_LEN + set.data.len() * 4);
    bytes.extend_from_slice(EMB_MAGIC);
    bytes.extend_from_slice(&count.to_le_bytes());
    bytes.extend_from_slice(&dim.to_le_bytes());
    bytes.push(u8::from(set.normalized));
    for x in &set.data {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;

    let ids_path = ids_manifest_path(path);
    let file = File::create(&ids_path).map_err(|e| Error::io(&ids_path, e))?;
    let mut out = BufWriter::new(file);
    for id in &set.ids {
        let line = serde_json::to_string(id).expect("strings always serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(&ids_path, e))?;
    }
    out.flush().map_err(|e| Error::io(&ids_path, e))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (count, dim, normalized, data) = decode_emb1(&bytes)?;

    let ids_path = ids_manifest_path(path);
    let mut ids = Vec::with_capacity(count);
    for (line_no, line) in open_lines(&ids_path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let id: String = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: ids_path.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        ids.push(id);
    }
    if ids.len() != count {
        return Err(Error::Format(format!(
            "header declares {count} rows but manifest lists {} ids",
            ids.len()
        )));
    }
    EmbeddingSet::new(ids, dim, data, normalized)
}

fn decode_emb1(bytes: &[u8]) -> Result<(usize, usize, bool, Vec<f32>)> {
    if bytes.len() < 4 || &bytes[..4] != EMB_MAGIC {
        return Err(Error::Format("bad magic, expected \"EMB1\"".into()));
    }
    if bytes.len() < EMB_HEADER_LEN {
        return Err(Error::Format("truncated header".into()));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let normalized = match bytes[12] {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad normalized flag {other}"))),
    };
    let payload_len = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format(format!("count {count} x dim {dim} overflows")))?;
    let payload = &bytes[EMB_HEADER_LEN..];
    if payload.len() < payload_len {
        return Err(Error::Format(format!(
            "truncated payload: expected {payload_len} bytes, found {}",
            payload.len()
        )));
    }
    if payload.len() > payload_len {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            payload.len() - payload_len
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((count, dim, normalized, data))
}

/// Venue/year coverage of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CorpusManifest {
    /// venue → (first year, last year)
    pub venues: BTreeMap<String, (i32, i32)>,
    /// venue → year → paper count
    pub counts: BTreeMap<String, BTreeMap<i32, usize>>,
}

impl CorpusManifest {
    pub fn from_papers(papers: &[PaperRecord]) -> Self {
        let mut manifest = CorpusManifest::default();
        for p in papers {
            *manifest
                .counts
                .entry(p.venue.clone())
                .or_default()
                .entry(p.year)
                .or_default() += 1;
            manifest
                .venues
                .entry(p.venue.clone())
                .and_modify(|(lo, hi)| {
                    *lo = (*lo).min(p.year);
                    *hi = (*hi).max(p.year);
                })
                .or_insert((p.year, p.year));
        }
        manifest
    }

    pub fn total(&self) -> usize {
        self.counts.values().flat_map(|m| m.values()).sum()
    }
}
