//! IO, file formats, and the command-line interface for the
//! channel-sounding toolkit. The algorithms live in `sounder-core`.

pub mod capture;
pub mod cli;
pub mod error;
pub mod iqfile;
pub mod model;
pub mod scenario;
pub mod svg;
pub mod timestamp;
