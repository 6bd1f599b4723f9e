//! Denoising of 3-D image cubes (two spatial dimensions x one spectral
//! dimension) with the STAR / STAR-S models: an orthogonal spectral
//! subspace, a Tucker-dictionary sparse code over overlapping patches of
//! the subspace coefficient image, and a low-rank prior on the codes,
//! solved by ADMM.
//!
//! The solver runs in two modes:
//!
//! * **classical** — one fixed parameter set iterated until the primal
//!   residual drops below a tolerance;
//! * **unrolled** — a fixed number of stages, each with its own parameter
//!   set loaded from a schedule (the stage parameters play the role of
//!   learned weights).
//!
//! The crate is `no_std` + `alloc`; file formats, schedule parsing and the
//! command-line front end live in the companion `star-cli` crate.
//!
//! All operations are deterministic: random probes are seeded, reductions
//! run in fixed order, and per-patch parallelism (feature `parallel`)
//! never changes results.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dictionary;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod patches;
pub mod prox;
pub mod rng;
pub mod solver;
pub mod tensor;

pub use error::Error;
pub use tensor::{Cube, Matrix};

/// Convenience alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
