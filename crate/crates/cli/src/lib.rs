//! Plumbing for the `cubesum` binary: JSON-lines records, resumable scans,
//! and the check against the tabulated class groups.

pub mod appendix;
pub mod commands;
pub mod error;
pub mod record;
pub mod scan;

pub use commands::run;
pub use error::CliError;
pub use record::{compute_record, RecordConfig, ResultRecord};
pub use scan::{run_scan, ScanOptions, ScanSummary};
