//! File formats, command line and HTTP service for the `algebroid` engine.

pub mod api;
pub mod dto;
pub mod server;
