pub mod batch;
pub mod config;
pub mod output;

pub use batch::{manifest_without_timestamp, run_batch, BatchOptions, BatchSummary, MANIFEST_NAME};
pub use config::{parse_config, parse_config_str, GainsRequest, OutputConfig, OutputFormat, RunConfig};
pub use output::{read_trajectory, trajectory_header, write_trajectory, TRAJECTORY_COLUMNS};
