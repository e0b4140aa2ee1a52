//! Library side of the `kreinbie` binary: configuration schema, invariant
//! suites and artifact writers, kept linkable so integration tests and fuzz
//! targets can drive the parsers directly.

pub mod config;
pub mod error;
pub mod report;
pub mod tasks;
