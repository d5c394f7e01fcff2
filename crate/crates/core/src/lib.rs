//! Greedy vertex quantization on polytopes: the map `phi_gamma(x) = x + gamma - v(x)`,
//! error diffusion halftoning, invariant regions, and classical special cases.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod diffusion;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod netpbm;
pub mod polytope;
pub mod regions;

pub use error::{Error, Result};
pub use polytope::{preset, HalfSpace, Polytope, Preset, VertexId};
