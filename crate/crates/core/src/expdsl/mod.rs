//! Experiment description files.
//!
//! A file is a list of `[section]` blocks holding `key = value` lines; `#`
//! starts a comment. Sections: system, electron, nucleus (repeatable),
//! resonator, sequence, noise, sweep, output (repeatable). Quantities carry a
//! unit suffix; see [`units::UNITS`]. Every key left out takes the value
//! listed in [`DEFAULTS`], and that table is written into each dataset.

mod config;
mod dataset_io;
mod syntax;
pub mod units;

pub use config::{parse_experiment, ExperimentConfig, OutputSpec, B1_TOLERANCE, DEFAULTS, DEFAULTS_VERSION};
pub use dataset_io::{
    emit_dataset, format_sig9, parse_dataset, parse_dataset_csv, parse_dataset_json, DatasetError, OutputFormat,
};
pub use syntax::{ParseError, SECTIONS};
pub use units::{parse_quantity, Quantity, Unit};
