//! Configuration, snapshot persistence, trace emission and subcommands for the
//! `elsim` binary.

pub mod commands;
pub mod config;
pub mod snapshot;
