//! Library surface of the experiment runner, shared by the binary and its
//! integration tests.

pub mod config;
pub mod report;
pub mod runner;
