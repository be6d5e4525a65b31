//! Text and JSON formats plus the `relphase` command line, on top of the
//! `no_std` core crate.

pub mod cli;
pub mod report;
pub mod text;
