//! File formats, corpora and the command line around `ser-core`.

pub mod cli;
pub mod error;
pub mod extract;
pub mod manifest;
pub mod model_io;
pub mod pipeline;
pub mod synth_corpus;
pub mod wav;

pub use error::SerError;
