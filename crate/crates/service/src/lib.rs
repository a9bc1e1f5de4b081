//! CLI and HTTP service over the gas-bearing rotor engine.

pub mod api;
pub mod cli;
pub mod config;
pub mod manifest;
pub mod registry;
pub mod server;
