//! Eigenvector localization for real orthogonally-invariant random matrices.
//!
//! The crate samples the real elliptic Ginibre family and related ensembles,
//! measures inverse participation ratios (IPRs) of their eigenvectors, and
//! evaluates the exact laws those IPRs follow when the eigenvalue sits at
//! height `y/√N` above the real axis.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod ipr;
pub mod legendre;
pub mod rng;
pub mod special;
pub mod theory;

pub use error::{Error, Result};
