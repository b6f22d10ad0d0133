//! Configuration, command dispatch and CSV/JSON emission for the
//! `canonical-weyl` binary.
//!
//! Exit codes: `0` success, `2` a checked inequality failed, `3` bad
//! configuration or i/o, `4` numeric failure.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, serialize_config, Command, Format, RunConfig};
pub use error::CliError;
pub use run::run;
