//! File formats, reports and the `ucover` command line on top of
//! `ucover-core`.

pub mod cli;
pub mod io;
pub mod report;
pub mod runner;

pub use runner::RayonRunner;
