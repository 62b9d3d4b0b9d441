//! Detection of market manipulation in DEX-traded meme coins.
//!
//! The crate bundles the detectors (wash trading, liquidity-pool price
//! inflation, pump-and-dump, rug pull, ownership anomalies), a TF-IDF name
//! classifier for meme tokens, return analytics and prevalence reporting,
//! and a constant-product AMM simulator that generates labeled synthetic
//! markets for validating all of the above.

pub mod amm;
pub mod analytics;
pub mod classifier;
pub mod config;
pub mod error;
pub mod extraction;
pub mod growth;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod scenario;

pub use error::{Error, Result};
