//! Experiment harness: configuration, the experiment catalog and record writers.

pub mod config;
pub mod experiments;
pub mod record;

pub use config::{parse_assignment, parse_config, parse_config_file, ConfigFile, ExperimentConfig, OutputFormat, Params, DEFAULT_SEED};
pub use experiments::{catalog_listing, narrowband_gains, run_experiment, Experiment};
pub use record::{write_csv, write_json, write_records, write_records_to_path, Fields, ResultRecord};
