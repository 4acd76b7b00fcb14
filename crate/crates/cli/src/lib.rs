//! Command-line front end: CSV ingestion, experiment drivers and the
//! `lwf` argument parser.

pub mod app;
pub mod experiments;
pub mod io;
