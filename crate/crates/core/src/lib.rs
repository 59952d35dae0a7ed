//! Complaint descriptions from product videos, grounded in similar past
//! reviews, plus the metrics used to judge them.
//!
//! - [`corpus`]: record types, JSONL parsing and complaint filtering.
//! - [`fusion`] and [`vindex`]: query construction and exact nearest-neighbour search.
//! - [`raggen`]: the retrieve, prompt and generate pipeline with provenance.
//! - [`complaint_metrics`] and [`nlg_metrics`]: complaint retention and text quality.
//! - [`provider`]: the model-service boundary, with HTTP client and mocks.
//! - [`cli`]: the `comvid` command line.

pub mod cli;
pub mod complaint_metrics;
pub mod corpus;
pub mod fusion;
pub mod nlg_metrics;
pub mod provider;
pub mod raggen;
pub mod text;
pub mod vindex;
