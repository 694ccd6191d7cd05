//! Gromov distortion of polygonal space curves.
//!
//! The crate is organised around a handful of modules:
//!
//! - [`geometry`]: polygonal curves, arclength/chord queries, simplicity,
//!   and the plain-text / JSON curve file formats.
//! - [`bounds`]: closed-form length and distortion bounds (`m`, `m1`,
//!   `theta0`, the secant-length bound and friends).
//! - [`distortion`]: certified branch-and-bound enclosures of the distortion
//!   of a polygon, plus sampled estimates.
//! - [`oracle`]: brute-force oracles (shortest paths outside the unit ball on
//!   a geodesic grid) and inequality sweeps.
//! - [`knots`]: example curve generators and the elementary-move isotopy test.
//! - [`optimize`]: simulated annealing of distortion within a knot type.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distortion;
mod error;
pub mod geometry;
pub mod knots;
pub mod optimize;
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{ArcInterval, CurvePoint, PolyCurve, Vec3};
