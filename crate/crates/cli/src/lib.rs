//! Library half of the command-line tool: request types, scan drivers,
//! CSV emission, the beam-parameter fitter, config-file handling and the
//! self-test suites.

pub mod config;
pub mod fit;
pub mod request;
pub mod scan;
pub mod selftest;
pub mod table;
