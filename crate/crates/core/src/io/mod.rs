//! Configuration files, output formats and the run driver.

pub mod config;
pub mod output;
pub mod run;
pub mod snapshot;

pub use config::{parse_config, RunConfig};
pub use output::{CsvWriter, CSV_HEADER};
pub use run::{run, RunSummary};
pub use snapshot::{read_snapshot, write_snapshot};
