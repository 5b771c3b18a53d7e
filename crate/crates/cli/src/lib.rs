//! Library side of the `lcdt` command: configuration, commands and verification suites.

pub mod commands;
pub mod config;
pub mod verify;
