//! Trust-region-free policy optimization toolkit.
//!
//! Two halves live here:
//!
//! - Exact analytics on small finite MDPs ([`tabular`]): values, advantages,
//!   discounted state distributions, the surrogate objectives, and numeric
//!   verification of the performance-difference identity and the monotonic
//!   improvement bounds behind TRPO-style and trust-region-free updates.
//! - A desk-scale training stack: a hand-rolled tanh actor-critic with exact
//!   reverse-mode gradients ([`nn`]), the PG / ratio-clip / PPO / TREFree /
//!   TRPO objective family ([`objectives`]), analytic benchmark environments
//!   ([`envs`]) and the outer rollout/optimization loop ([`trainer`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); file formats, the
//! CLI and everything IO-shaped live in the companion `trefree` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod envs;
mod error;
pub mod gaussian;
pub mod gradcheck;
mod linalg;
pub mod nn;
pub mod objectives;
pub mod rng;
pub mod tabular;
pub mod trainer;

pub use error::{CoreError, Result};
