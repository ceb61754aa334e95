//! Operator-field numerics for the group C*-algebras of the Heisenberg
//! groups `H_n` and the thread-like groups `G_N`.
//!
//! Every representation operator is a dense, quadrature-weighted kernel on a
//! uniform grid. The library builds those kernels, the almost-homomorphisms
//! that approximate them near the degenerate fiber, and the defect quantities
//! whose decay along refinement ladders certifies the limit conditions.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod eig;
mod error;
mod fft;
mod util;

pub mod extensions;
pub mod heisenberg;
pub mod linop;
pub mod nu_field;
pub mod perfect_data;
pub mod sampling;
pub mod threadlike;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Relative size below which sampled values count as decayed.
pub const DECAY_FLOOR: f64 = 1e-6;

/// Slack used by every "decreasing" verdict to absorb floating-point ties.
pub const DECREASE_SLACK: f64 = 1e-9;

/// True when every entry is below its predecessor, up to [`DECREASE_SLACK`].
pub fn is_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] + DECREASE_SLACK)
}
