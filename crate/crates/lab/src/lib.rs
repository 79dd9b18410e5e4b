//! Batch driver for riccati-core: TOML run files in, JSON/CSV/table
//! reports out. The binary is a thin wrapper over [`app::execute`].

pub mod app;
pub mod commands;
pub mod config;
pub mod render;

pub use commands::{Status, SCHEMA_VERSION};
pub use config::{Format, RunConfig};
