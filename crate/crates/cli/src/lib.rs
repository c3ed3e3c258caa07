//! Command implementations and the validation harness behind the `tridiag`
//! binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;
