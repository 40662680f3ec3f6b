//! File formats, configuration and the command-line pipeline around
//! `scorecard-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod formats;
pub mod fsio;
