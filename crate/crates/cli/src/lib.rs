//! Library half of the `c2lab` command-line tool: the command
//! implementations and the run report format.

pub mod commands;
pub mod report;
