//! File formats, configuration and command implementations for the
//! `siterank` command-line tool.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod report;
