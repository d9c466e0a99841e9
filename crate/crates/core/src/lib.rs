//! Text mining and knowledge extraction for scientific conference proceedings.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`]: data model and on-disk formats (JSON Lines corpora, `EMB1`
//!   embedding matrices, text-block files).
//! - [`extract`]: title, abstract and reference parsing from text blocks,
//!   tokenization and the English-word ratio gate.
//! - [`matching`]: edit distances, token sort ratio and reference-title
//!   matching that produces citation edges.
//! - [`vecsearch`]: dot-product search over unit vectors, skip-gram word
//!   vectors and keyword search with spelling-variant expansion.
//! - [`topics`]: PCA/UMAP reduction, HDBSCAN, c-TF-IDF keywords, trend tables
//!   and volume histograms.
//! - [`graphs`]: citation graph, document-word bipartite graph, projections,
//!   centralities and common-neighbor link prediction.

pub mod corpus;
mod error;
pub mod extract;
pub mod graphs;
pub mod matching;
pub mod topics;
pub mod vecsearch;

pub use error::{Error, Result};
