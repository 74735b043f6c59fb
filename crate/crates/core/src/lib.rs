//! Baseband simulator for MIMO full-duplex self-interference cancellation
//! with per-transmitter reference receivers.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod budget;
pub mod cancellation;
pub mod error;
pub mod harness;
pub mod impairments;
pub mod rng;
pub mod waveform;

pub use error::{Error, Result};
