//! Blind video source-camera identification from per-frame forensic features.

pub mod camsim;
pub mod classifiers;
pub mod config;
pub mod dataset;
pub mod distortion;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod frames_io;
pub mod imaging;
pub mod jpeg;
pub mod pipeline;
pub mod seed;
pub mod selection;

pub use error::{Error, Result};
