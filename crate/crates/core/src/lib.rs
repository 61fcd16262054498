//! Expected spectral moments of randomly erased unit-norm frames.
//!
//! A frame is an `m × n` matrix `F` whose columns are unit vectors. Erasing
//! each column independently with probability `1 - p` gives `X = F P`, and the
//! quantity of interest is the expected normalized trace
//! `m_d = E[tr((X'X)^d)] / n`. This crate computes `m_d` three ways (closed
//! coefficient identities, exhaustive enumeration, Monte Carlo), evaluates the
//! erasure Welch bound built from Wachter's MANOVA moments, and classifies when
//! the bound is attained (tight frames for `d = 2, 3`, equiangular tight frames
//! for `d = 4`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod erasure_moments;
pub mod error;
pub mod frames;
pub mod manova;
pub mod numeric;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use frames::{Field, Frame, GramMatrix};
