//! Service configuration: TOML file, then `CORPUSFORGE_*` environment
//! overrides, then command-line flags.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use corpusforge_core::matching::DEFAULT_MATCH_THRESHOLD;
use corpusforge_core::topics::{ClusterParams, ReductionConfig, ReductionMethod};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "CORPUSFORGE_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub corpus: PathBuf,
    pub word_vectors: PathBuf,
    /// Sentence embeddings; document vectors come from word2vec when unset.
    pub embeddings: Option<PathBuf>,
    /// Fitted topics; fitted at load time when unset.
    pub topics: Option<PathBuf>,
    /// Citation edge CSV; references are matched at load time when unset.
    pub citations: Option<PathBuf>,
    pub embedder_url: Option<String>,
    pub ui_dir: Option<PathBuf>,
    pub default_k: usize,
    pub match_threshold: u8,
    pub volume_bins: usize,
    pub top_n: usize,
    pub reduction: ReductionConfig,
    pub cluster: ClusterParams,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".parse().unwrap(),
            corpus: PathBuf::from("corpus.jsonl"),
            word_vectors: PathBuf::from("w2v.emb1"),
            embeddings: None,
            topics: None,
            citations: None,
            embedder_url: None,
            ui_dir: None,
            default_k: 10,
            match_threshold: DEFAULT_MATCH_THRESHOLD,
            volume_bins: 64,
            top_n: 10,
            reduction: ReductionConfig::default(),
            cluster: ClusterParams::default(),
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Input(format!("invalid value {value:?} for {ENV_PREFIX}{key}"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, value))
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// Applies `CORPUSFORGE_<KEY>` overrides; nested keys use an underscore,
    /// e.g. `CORPUSFORGE_CLUSTER_MIN_SAMPLES`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let v = value.as_str();
            match key {
                "LISTEN" => self.listen = parse(key, v)?,
                "CORPUS" => self.corpus = v.into(),
                "WORD_VECTORS" => self.word_vectors = v.into(),
                "EMBEDDINGS" => self.embeddings = Some(v.into()),
                "TOPICS" => self.topics = Some(v.into()),
                "CITATIONS" => self.citations = Some(v.into()),
                "EMBEDDER_URL" => self.embedder_url = Some(v.to_string()),
                "UI_DIR" => self.ui_dir = Some(v.into()),
                "DEFAULT_K" => self.default_k = parse(key, v)?,
                "MATCH_THRESHOLD" => self.match_threshold = parse(key, v)?,
                "VOLUME_BINS" => self.volume_bins = parse(key, v)?,
                "TOP_N" => self.top_n = parse(key, v)?,
                "SEED" => self.reduction.seed = parse(key, v)?,
                "REDUCTION_METHOD" => {
                    self.reduction.method = v.parse::<ReductionMethod>().map_err(|_| bad(key, v))?
                }
                "REDUCTION_TARGET_DIM" => self.reduction.target_dim = parse(key, v)?,
                "REDUCTION_N_NEIGHBORS" => self.reduction.n_neighbors = parse(key, v)?,
                "REDUCTION_MIN_DIST" => self.reduction.min_dist = parse(key, v)?,
                "REDUCTION_N_EPOCHS" => self.reduction.n_epochs = parse(key, v)?,
                "CLUSTER_MIN_CLUSTER_SIZE" => self.cluster.min_cluster_size = parse(key, v)?,
                "CLUSTER_MIN_SAMPLES" => self.cluster.min_samples = parse(key, v)?,
                "LOG" => {}
                _ => tracing::warn!("ignoring unknown setting {name}"),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.default_k == 0 {
            return Err(CliError::Input("default_k must be >= 1".into()));
        }
        if self.match_threshold > 100 {
            return Err(CliError::Input("match_threshold must be <= 100".into()));
        }
        if self.volume_bins < 2 {
            return Err(CliError::Input("volume_bins must be >= 2".into()));
        }
        self.reduction.validate()?;
        self.cluster.validate()?;
        Ok(())
    }
}
