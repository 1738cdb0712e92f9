pub mod binarizer;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evalkit;
pub mod glyphfeat;
pub mod localizer;
pub mod mfi;
pub mod pipeline;
pub mod pixelcore;
pub mod recognizer;
pub mod synth;
pub mod textline;

pub use error::{Error, Result};
