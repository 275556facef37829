//! Experiment runner for the multi-static ISAC toolkit: JSON scenario files,
//! parameter sweeps and CSV output.

pub mod config;
pub mod experiment;
pub mod presets;

pub use config::{parse_config, parse_config_str, ConfigError, HarnessConfig, LayoutSpec};
pub use experiment::{run_experiment, write_csv, Experiment, ExperimentSpec, Row, Sweep, SweepParam, COLUMNS};
