//! Rate-region analysis of the zero-forcing precoder for a two-LED,
//! two-user intensity-modulated broadcast channel with per-LED peak power
//! and dimming (fixed average power) constraints.
//!
//! The crate is organized around the pipeline:
//!
//! * [`channel_model`] — Lambertian line-of-sight gains for an indoor room
//!   layout, producing the 2x2 channel matrix;
//! * [`geometry`] — the feasible signal parallelogram and the largest
//!   inscribed rectangles centered at the dimming point;
//! * [`capacity`] — mutual information of the uniform-input Gaussian
//!   channel and its inverse;
//! * [`rate_region`] — Pareto boundary tracing, membership tests and
//!   maximum (weighted-)symmetric rates;
//! * [`transceiver`] — Monte-Carlo simulation of the mean-shift encoder and
//!   zero-forcing precoder with constraint verification.

pub mod capacity;
pub mod channel_model;
pub mod geometry;
pub mod rate_region;
pub mod transceiver;
