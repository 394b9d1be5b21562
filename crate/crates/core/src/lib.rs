//! Stable-throughput regions of the two-user interference channel.
//!
//! Two source/destination pairs share a slotted channel with Rayleigh block
//! fading and power-law pathloss. Each source keeps an infinite queue and a
//! packet is delivered when the receiver's decoding event holds in that slot.
//! This crate provides:
//!
//! - [`channel`]: closed-form and Monte Carlo success probabilities for
//!   treating interference as noise, successive interference cancellation and
//!   MISO beamforming (MRT / zero forcing).
//! - [`region`]: stability regions built from a [`channel::SuccessProfile`]
//!   through the two dominant systems, with and without random access.
//! - [`closure`]: envelopes of those regions over power and access grids.
//! - [`sim`]: a slot-level simulator of the coupled queues with empirical
//!   stability verdicts.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod closure;
mod error;
pub mod region;
pub mod sim;

pub use error::{Error, Result};
