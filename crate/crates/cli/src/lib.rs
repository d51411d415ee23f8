//! Command-line driver for `syz-core`: JSON in, deterministic JSON reports
//! out, and the acceptance matrix.

pub mod commands;
pub mod report;
pub mod suite;
