//! Command-line plumbing for `minexp`: matrix files, sweep configuration
//! and the Monte-Carlo sweeps behind the `sweep` and `noise-sweep`
//! subcommands.

pub mod config;
pub mod io;
pub mod sweep;
