//! Host-side tooling around `rcfuse-core`: scene and detection JSON,
//! a seeded synthetic scene generator with a noisy stand-in detector, the
//! per-scene fusion pipeline and its parallel batch runner, directory
//! evaluation, BEV rendering and feature-plane export.

pub mod batch;
pub mod detector;
pub mod error;
pub mod eval;
pub mod export;
pub mod pipeline;
pub mod render;
pub mod schema;
pub mod synth;

pub use error::{Category, Error, Result};
