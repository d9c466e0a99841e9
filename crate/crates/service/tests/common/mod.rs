#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use corpusforge_core::corpus::{save_blocks, PaperBlocks, TextBlock};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub const TOPIC_WORDS: [&[&str]; 3] = [
    &[
        "emittance", "quadrupole", "optics", "lattice", "chromaticity", "dipole", "orbit",
        "injection", "aperture", "sextupole", "betatron", "dispersion",
    ],
    &[
        "cryogenic", "helium", "cryomodule", "superconducting", "niobium", "thermal", "cooldown",
        "pressure", "quench", "cavity", "gradient", "refrigerator",
    ],
    &[
        "software", "database", "network", "interface", "monitoring", "archiver", "server",
        "python", "alarm", "timing", "operator", "framework",
    ],
];

const COMMON_WORDS: &[&str] = &[
    "system", "results", "measurement", "design", "performance", "analysis", "facility",
    "accelerator", "commissioning", "upgrade",
];

const SYLLABLES: [&str; 8] = ["ka", "lo", "mi", "ra", "tu", "ve", "zo", "ni"];

fn block(page: u32, y: f64, text: impl Into<String>) -> TextBlock {
    TextBlock {
        page,
        bbox: [50.0, y, 550.0, y + 20.0],
        text: text.into(),
    }
}

fn title_case(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let lower = w.to_lowercase();
            let mut c = lower.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub struct SyntheticPaper {
    pub id: String,
    pub topic: usize,
    pub year: i32,
    pub title: String,
    pub cites: Vec<usize>,
}

/// Proceedings rendered as text blocks: three vocabularies, uppercase
/// titles, an abstract, and numbered references quoting earlier titles.
pub fn synthetic_blocks(n: usize, seed: u64) -> (Vec<PaperBlocks>, Vec<SyntheticPaper>) {
    assert!(n <= 64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut meta: Vec<SyntheticPaper> = Vec::new();
    let mut out = Vec::new();
    for i in 0..n {
        let topic = i % 3;
        let year = 2018 + ((i / 3) % 4) as i32;
        let id = format!("IPAC-{year}-MOPA{i:03}");
        let name = format!("{}{}{}", SYLLABLES[i % 8], SYLLABLES[(i / 8) % 8], SYLLABLES[(i * 3 + 1) % 8]);
        let words: Vec<&str> = TOPIC_WORDS[topic].choose_multiple(&mut rng, 3).copied().collect();
        let title = format!("{} {} {} FOR THE {} PROJECT", words[0], words[1], words[2], name).to_uppercase();

        let abstract_words: Vec<&str> = (0..45)
            .map(|_| {
                if rng.random_bool(0.65) {
                    *TOPIC_WORDS[topic].choose(&mut rng).unwrap()
                } else {
                    *COMMON_WORDS.choose(&mut rng).unwrap()
                }
            })
            .collect();
        let earlier: Vec<usize> = (0..i).filter(|&j| meta[j].topic == topic).collect();
        let cites: Vec<usize> = earlier
            .choose_multiple(&mut rng, earlier.len().min(2))
            .copied()
            .collect();

        let mut blocks = vec![
            block(0, 20.0, format!("Proceedings of IPAC{year}, Synthetic City")),
            block(0, 60.0, title.clone()),
            block(0, 100.0, "A. Author, B. Writer, Example Laboratory, Somewhere"),
            block(0, 140.0, "Abstract"),
            block(0, 160.0, format!("{}.", abstract_words.join(" "))),
            block(0, 300.0, "INTRODUCTION"),
            block(0, 320.0, "The facility has operated for several years."),
            block(1, 600.0, "REFERENCES"),
        ];
        for (r, &j) in cites.iter().enumerate() {
            blocks.push(block(
                1,
                620.0 + 20.0 * r as f64,
                format!(
                    "[{}] C. Someone et al., \u{201c}{},\u{201d} in Proc. IPAC{}, pp. 1-4.",
                    r + 1,
                    title_case(&meta[j].title),
                    meta[j].year
                ),
            ));
        }
        if cites.is_empty() {
            blocks.push(block(1, 620.0, "[1] D. Other, Unpublished notes, 2001."));
        }
        out.push(PaperBlocks {
            id: id.clone(),
            venue: None,
            year: None,
            blocks,
        });
        meta.push(SyntheticPaper {
            id,
            topic,
            year,
            title,
            cites,
        });
    }
    (out, meta)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_corpusforge")
}

pub fn run_cli<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(bin())
        .args(args)
        .env_remove("CORPUSFORGE_LOG")
        .output()
        .expect("spawn corpusforge")
}

pub fn check_ok(out: &Output, what: &str) -> Result<(), String> {
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{what} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

pub struct PipelineFiles {
    pub blocks: PathBuf,
    pub corpus: PathBuf,
    pub edges: PathBuf,
    pub word_vectors: PathBuf,
    pub topics: PathBuf,
}

impl PipelineFiles {
    pub fn in_dir(dir: &Path) -> Self {
        PipelineFiles {
            blocks: dir.join("blocks.jsonl"),
            corpus: dir.join("corpus.jsonl"),
            edges: dir.join("edges.csv"),
            word_vectors: dir.join("w2v.emb1"),
            topics: dir.join("topics.json"),
        }
    }
}

/// extract, match, w2v-train and topics fit over `n` synthetic papers.
pub fn run_pipeline(dir: &Path, n: usize, seed: u64) -> Result<(PipelineFiles, Vec<SyntheticPaper>), String> {
    let files = PipelineFiles::in_dir(dir);
    let (blocks, meta) = synthetic_blocks(n, seed);
    save_blocks(&blocks, &files.blocks).map_err(|e| e.to_string())?;
    let s = |p: &Path| p.to_str().unwrap().to_string();

    let out = run_cli(["extract", "--blocks", &s(&files.blocks), "--out", &s(&files.corpus)]);
    check_ok(&out, "extract")?;
    let out = run_cli(["match", "--corpus", &s(&files.corpus), "--out", &s(&files.edges)]);
    check_ok(&out, "match")?;
    let out = run_cli([
        "w2v-train", "--corpus", &s(&files.corpus), "--out", &s(&files.word_vectors),
        "--dim", "24", "--epochs", "10", "--min-count", "2", "--seed", "3",
    ]);
    check_ok(&out, "w2v-train")?;
    let out = run_cli([
        "topics", "fit", "--corpus", &s(&files.corpus), "--word-vectors", &s(&files.word_vectors),
        "--out", &s(&files.topics), "--seed", "5", "--min-cluster-size", "5", "--min-samples", "5",
    ]);
    check_ok(&out, "topics fit")?;
    Ok((files, meta))
}

/// A running `corpusforge serve`, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn spawn_server(files: &PipelineFiles) -> Result<Server, String> {
    let mut child = Command::new(bin())
        .args(["serve", "--listen", "127.0.0.1:0"])
        .arg("--corpus")
        .arg(&files.corpus)
        .arg("--word-vectors")
        .arg(&files.word_vectors)
        .arg("--topics")
        .arg(&files.topics)
        .arg("--citations")
        .arg(&files.edges)
        .env("CORPUSFORGE_LOG", "warn")
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let stdout = child.stdout.take().unwrap();
    let mut line = String::new();
    BufReader::new(stdout)
        .read_line(&mut line)
        .map_err(|e| e.to_string())?;
    let base = line
        .trim()
        .strip_prefix("listening on ")
        .ok_or_else(|| format!("unexpected banner {line:?}"))?
        .to_string();
    Ok(Server { child, base })
}

pub async fn wait_ready(http: &reqwest::Client, base: &str, limit: Duration) -> Result<(), String> {
    let start = Instant::now();
    while start.elapsed() < limit {
        if let Ok(resp) = http.get(format!("{base}/api/health")).send().await {
            let v: Value = resp.json().await.map_err(|e| e.to_string())?;
            if v["ready"] == Value::Bool(true) {
                return Ok(());
            }
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    Err("server never became ready".into())
}

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Str,
    Int,
    Num,
    Bool,
    Arr,
    Obj,
}

fn kind_ok(v: &Value, kind: Kind) -> bool {
    match kind {
        Kind::Str => v.is_string(),
        Kind::Int => v.is_i64() || v.is_u64(),
        Kind::Num => v.is_number(),
        Kind::Bool => v.is_boolean(),
        Kind::Arr => v.is_array(),
        Kind::Obj => v.is_object(),
    }
}

/// Checks that `v` is an object carrying each field with the given type.
pub fn expect_fields(v: &Value, fields: &[(&str, Kind)], what: &str) -> Result<(), String> {
    let obj = v.as_object().ok_or_else(|| format!("{what}: expected object, got {v}"))?;
    for (name, kind) in fields {
        match obj.get(*name) {
            Some(x) if kind_ok(x, *kind) => {}
            Some(x) => return Err(format!("{what}.{name}: expected {kind:?}, got {x}")),
            None => return Err(format!("{what}: missing field {name}")),
        }
    }
    Ok(())
}

pub fn expect_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, String> {
    v.as_array().ok_or_else(|| format!("{what}: expected array, got {v}"))
}

pub const HIT_FIELDS: &[(&str, Kind)] = &[
    ("id", Kind::Str),
    ("title", Kind::Str),
    ("year", Kind::Int),
    ("venue", Kind::Str),
    ("score", Kind::Num),
];
