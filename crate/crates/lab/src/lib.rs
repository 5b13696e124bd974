//! Configuration, orchestration and exports for the coupled-wave laboratory.
//!
//! A run is described by a [`RunConfig`], executed by [`execute`] into a
//! [`RunOutput`] and written to disk with [`RunOutput::persist`]. All
//! computation is deterministic: identical configurations produce
//! byte-identical files regardless of sweep concurrency.

pub mod config;
pub mod error;
pub mod export;
pub mod record;
pub mod run;

pub use config::{Mode, RunConfig};
pub use error::{LabError, Result};
pub use record::{RunOutput, RunRecord};
pub use run::execute;
