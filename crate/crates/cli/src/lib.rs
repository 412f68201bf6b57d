//! Library side of the `tunnelnav` command: configuration, artifacts and
//! subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
