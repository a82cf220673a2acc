//! Experiment harness for `modneat`: configuration, multi-run orchestration,
//! CSV/JSON/SVG artifacts and the `modneat` command-line tool.

pub mod config;
pub mod error;
pub mod experiment;
pub mod genome_io;
pub mod stats;
pub mod svg;
pub mod tools;

pub use error::{LabError, Result};
