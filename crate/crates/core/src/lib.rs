//! Sensor-assisted channel prediction and uplink MU-MIMO rate adaptation for
//! low-altitude UAV hotspots, as a deterministic simulator.
//!
//! The crate is layered bottom-up: [`geometry`] produces flight states,
//! [`channel`] turns them into per-antenna gains, [`fading`] and
//! [`prediction`] forecast the channel from readings and sensor broadcasts,
//! [`mumimo`] and [`rates`] model decoding and rate choice, [`policies`]
//! holds the compared rate-adaptation arms, and [`harness`] runs scenarios.

// `!(x > 0.0)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod fading;
pub mod geometry;
pub mod harness;
pub mod mumimo;
pub mod policies;
pub mod prediction;
pub mod rates;

pub use error::{Error, Result};
