//! File formats, reports and the benchmark harness behind the `icp` binary.

pub mod bench;
pub mod compare;
pub mod csv_io;
pub mod error;
pub mod records;
pub mod report;

pub use error::{Error, Result};
