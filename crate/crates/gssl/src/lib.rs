//! Datasets, experiments and command line tooling around [`gssl_core`].
//!
//! | module | contents |
//! |---|---|
//! | [`data`] | CSV and IDX loaders |
//! | [`harness`] | label sampling, noise, multi-seed runs, reports |
//! | [`parallel`] | threaded kNN, `P_LL` and rate sweeps |
//! | [`cache`] | on-disk spectral basis cache |
//! | [`curve`] | sweep CSV export |
//! | [`synth`] | generated datasets |
//! | [`rng`] | portable seeded sampling |

pub mod cache;
pub mod curve;
pub mod data;
pub mod error;
pub mod harness;
pub mod parallel;
pub mod rng;
pub mod synth;

pub use error::{ErrorClass, GsslError, Result};
pub use gssl_core;
