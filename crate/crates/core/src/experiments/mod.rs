//! Quench protocols, parameter scans, critical-line extraction and the
//! configuration/output plumbing used by the command-line tool.

pub mod config;
pub mod critical;
pub mod output;
pub mod quench;
pub mod report;
pub mod scan;

pub use config::{Engine, EngineConfig, Grid, InitialState, RunConfig};
pub use critical::{critical_line, CriticalLineFit, CriticalLineSpec, CriticalPoint};
pub use output::{write_atomic, write_csv_atomic, Manifest};
pub use quench::{run_quench, Schedule};
pub use report::{contours, ground_state_report};
pub use scan::{scan, ScanResult, ScanSpec, SCAN_COLUMNS};
