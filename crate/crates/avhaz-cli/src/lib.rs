//! Support library for the `avhaz` binary: CSV I/O, report shaping and the
//! subcommand implementations.

pub mod commands;
pub mod dataio;
pub mod report;
