//! File IO, report generation, the command-line surface, and the bundled
//! healthcare diagnosis model for the `sdflow-core` engine.

pub mod acceptance;
pub mod csvio;
pub mod healthcare;
pub mod loader;
pub mod manifest;
pub mod patterns;
pub mod svg;

pub use loader::{load_model_files, LoadedModel};
