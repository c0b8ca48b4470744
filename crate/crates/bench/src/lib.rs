//! Experiment runner for the factorization benchmarks.
//!
//! Each experiment takes a `Params` built from [`settings::Settings`], returns
//! a report that tests can inspect, and renders its CSV, SVG and manifest
//! files as [`output::Artifacts`].

pub mod experiments;
pub mod images;
pub mod output;
pub mod settings;
pub mod svg;
