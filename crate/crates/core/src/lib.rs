//! Local approximation of max-min linear programs.
//!
//! A max-min LP asks for `x ≥ 0` maximising `min_k Σ_v c_kv x_v` subject to
//! `Σ_v a_iv x_v ≤ 1` for every constraint `i`. This crate implements a
//! constant-horizon algorithm for the port-numbering model together with the
//! tooling needed to check it: instance handling, unfolding, the local
//! normalizing transformations, and an exact LP oracle.

pub mod algo;
pub mod error;
pub mod instance;
pub mod pipeline;
pub mod transform;
pub mod unfold;
pub mod verify;

pub use error::{Error, Result};
