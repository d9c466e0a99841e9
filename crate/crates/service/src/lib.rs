//! Command-line pipeline and HTTP API over a corpusforge corpus snapshot.

pub mod api;
pub mod cli;
pub mod config;
pub mod embedder;
pub mod error;
pub mod snapshot;
