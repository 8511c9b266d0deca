//! File formats and reports of the `conpart` command-line tool.

pub mod files;
pub mod report;
