#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

//! Core algorithms for a GSM-style channel-sounding toolkit.
//!
//! The crate synthesizes normal bursts, pushes them through simulated
//! multipath channels with AWGN, locates bursts in IQ streams, estimates the
//! channel impulse response by least squares or sliding correlation, and
//! characterizes the resulting per-burst tap statistics with distribution
//! fits, chi-square tests, and PCA-based scene classification.
//!
//! Everything here is `no_std` + `alloc`; IO, file formats, and the CLI live
//! in the companion `sounder` crate.

extern crate alloc;

pub mod burst;
pub mod channel;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod iq;
pub mod linalg;
pub mod pca;
pub mod rng;
pub mod special;
pub mod stats;
pub mod sync;

pub use error::{Error, Result};
