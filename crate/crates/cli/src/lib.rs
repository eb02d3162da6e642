//! Library half of the `motiondet` command-line tool: image codecs, run
//! configuration, record emission, the benchmark harness and the
//! subcommands themselves.

pub mod bench;
pub mod commands;
pub mod config;
pub mod pnm;
pub mod records;
