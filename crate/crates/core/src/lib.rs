//! Geometry and numerics for associating automotive radar returns with
//! camera detections.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Each module
//! covers one stage of the fusion pipeline:
//!
//! - [`geometry`]: frames, pinhole projection, 3D/2D boxes, multi-bin orientation.
//! - [`radar`]: radar points, sweep aggregation, radial velocity, pillar expansion.
//! - [`frustum`]: RoI frustums and radar-to-object association.
//! - [`features`]: keypoint heatmaps, radar feature planes, depth transform.
//! - [`objectives`]: focal, L1 and BCE losses with analytic gradients.
//! - [`decoder`]: peak extraction and 3D box decoding.
//! - [`metrics`]: distance-threshold matching, AP, TP errors and NDS.
//!
//! Units are meters, seconds and radians throughout. The egocentric frame is
//! x forward, y left, z up. The camera frame is x right, y down, z forward.

#![no_std]
#![deny(rust_2018_idioms, unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod decoder;
pub mod error;
pub mod features;
pub mod frustum;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod objectives;
pub mod radar;

pub use error::{Error, Result};
