//! Client for an external sentence-embedding sidecar.
//!
//! The sidecar accepts `POST {"text": "..."}` and answers `{"vector": [...]}`.

use std::time::Duration;

use corpusforge_core::vecsearch::normalize_vector;
use serde::{Deserialize, Serialize};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f32>,
}

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("embedder request failed: {0}")]
    Transport(String),

    #[error("embedder returned {got} dimensions, corpus embeddings have {expected}")]
    Dimension { expected: usize, got: usize },

    #[error("embedder returned a zero or non-finite vector")]
    Degenerate,
}

pub fn client() -> reqwest::Client {
    reqwest::Client::builder()
        .timeout(Duration::from_secs(30))
        .build()
        .expect("static client configuration")
}

/// Embeds `text` remotely and scales the result to unit length.
pub async fn embed_remote(
    http: &reqwest::Client,
    url: &str,
    text: &str,
    dim: usize,
) -> Result<Vec<f32>, EmbedError> {
    let transport = |e: reqwest::Error| EmbedError::Transport(e.to_string());
    let resp: EmbedResponse = http
        .post(url)
        .json(&EmbedRequest { text })
        .send()
        .await
        .map_err(transport)?
        .error_for_status()
        .map_err(transport)?
        .json()
        .await
        .map_err(transport)?;
    if resp.vector.len() != dim {
        return Err(EmbedError::Dimension {
            expected: dim,
            got: resp.vector.len(),
        });
    }
    if resp.vector.iter().any(|x| !x.is_finite()) {
        return Err(EmbedError::Degenerate);
    }
    normalize_vector(&resp.vector).ok_or(EmbedError::Degenerate)
}
