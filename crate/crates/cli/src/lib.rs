//! Command-line front end: plant files, run configuration, dispatch and
//! CSV reports.

pub mod config;
pub mod error;
pub mod output;
pub mod plant_io;
pub mod run;

pub use config::{Command, RunConfig};
pub use error::{CliError, Result};
pub use plant_io::{parse_plant, serialize_plant};
pub use run::run;
