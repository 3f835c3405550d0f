//! Graph-based semi-supervised classification with leave-one-out model selection.
//!
//! This crate is `no_std` (it needs `alloc`) and carries every numerical piece:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | kNN affinity graph, degree vector, `S`, combinatorial and normalized Laplacians |
//! | [`lgc`] | Local and Global Consistency diffusion: fixed-point iteration, dense oracle, `P_LL` |
//! | [`spectral`] | Eigenbasis of `L_n`, eigenvalue transform, `O(plc)` products and diagonals |
//! | [`loo`] | Diagonal-removed leave-one-out matrix `H`, row normalization, losses, accuracy |
//! | [`optim`] | Adam, projected minimization, central-difference gradient checks |
//! | [`autol`] | Per-label reliability weights (`Ω`) fitted on the leave-one-out loss |
//! | [`autod`] | Diffusion-rate sweeps and descent on the reparameterized rate |
//!
//! Propagation matrices follow one convention throughout: `P = β (I − αS)^{-1}`
//! with `β = 1 − α`, so the iterative, dense and spectral paths are interchangeable.
//!
//! IO, file formats, the experiment harness and the CLI live in the `gssl` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod autod;
pub mod autol;
pub mod error;
pub mod graph;
pub mod lgc;
pub mod linalg;
pub mod loo;
pub mod matrix;
pub mod optim;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{CsrMatrix, Mat};
