//! Command implementations and the HTTP scoring service behind the `capt`
//! binary.

pub mod commands;
pub mod config;
pub mod service;
