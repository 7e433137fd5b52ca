//! File formats, checkpointed builds, verification, reports and archives
//! for libraries produced by `kreglib-core`.

pub mod archive;
pub mod build;
pub mod config;
pub mod layout;
pub mod records;
pub mod report;
pub mod verify;

pub use build::{build, build_sizes};
pub use config::{ConfigError, RunConfig};
pub use verify::{verify_library, Findings};
