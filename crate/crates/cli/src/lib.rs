//! Report building and rendering behind the `netvar` command.

pub mod commands;
pub mod report;
