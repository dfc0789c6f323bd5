//! Batch execution, configuration files, trace files and replay for the
//! intersection simulator in `intersim-core`.

pub mod batch;
pub mod config;
pub mod output;
pub mod replay;

pub use batch::{run_batch, run_one, run_table, Batch, BatchOptions, BatchSpec};
pub use config::{load_config, parse_config, serialize_config};
