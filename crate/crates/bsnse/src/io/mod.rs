//! Configuration, orchestration and serialization: the flat `key = value`
//! config format, CSV writers and readers for fields and audit reports, the
//! reproducibility manifest and the subcommand dispatcher behind the binary.

mod commands;
mod config;
mod csv;
mod manifest;

pub use commands::{run, CliError, Subcommand};
pub use config::RunConfig;
pub use csv::{
    field_csv_string, read_field_csv, write_field_csv, write_norms_csv, write_report_csv,
    write_report_json, write_solution_slice_csv, write_table_csv, FIELD_HEADER,
};
pub use manifest::{sha256_hex, RunManifest};
