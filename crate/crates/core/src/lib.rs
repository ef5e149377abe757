//! Unsupervised sentence simplification over semantic graphs.
//!
//! A sentence arrives as a semantic graph built from its discourse
//! representation structure. Three stages rewrite it in a fixed order:
//!
//! 1. [`lexsimp`] swaps complex words for simpler ones chosen by
//!    distributional similarity and checked against the sentence context;
//! 2. [`splitter`] scores every grouping of the sentence's events and may
//!    split it into several shorter sentences;
//! 3. [`compressor`] deletes optional phrases by solving a small 0-1 program.
//!
//! [`lm`] provides the n-gram language model used by the splitter,
//! [`metrics`] the evaluation measures and [`pipeline`] ties it all together.

pub mod compressor;
pub mod drs;
pub mod error;
pub mod lexsimp;
pub mod lm;
pub mod metrics;
pub mod pipeline;
pub mod splitter;

pub use error::{Error, Result};
