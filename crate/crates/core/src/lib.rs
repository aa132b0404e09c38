//! Core engine for account risk rating over payer-payee transaction graphs.
//!
//! The pipeline turns raw transfer records into a directed bipartite graph
//! (payer roles on one side, payee roles on the other), scores every edge by
//! how little its endpoints appear to hide, and then propagates three
//! interdependent metrics — payer reliability, payee trustiness, and per-edge
//! confidence — to a fixed point. Converged reliability maps linearly onto a
//! 0-10 risk rating per account.
//!
//! This crate is `no_std`-compatible (with `alloc`); all floating-point
//! transcendentals go through [`libm`] so results are identical with and
//! without the `std` feature. File formats, the CLI, and wall-clock
//! benchmarking live in the companion `riskprop` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod eval;
pub mod exec;
pub mod graph;
pub mod ingest;
pub mod propagation;
pub mod rating;
pub mod rng;
pub mod synth;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
