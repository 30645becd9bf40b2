//! Session files and task orchestration for the command-line runner.

pub mod runner;
pub mod session;
