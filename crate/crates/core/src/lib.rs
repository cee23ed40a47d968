//! Numerical laboratory for constant-angle convex billiards.
//!
//! * [`support`], [`gutkin`]: planar convex bodies given by supporting functions
//!   and the constant-angle tables built from them.
//! * [`billiard2d`]: the planar billiard map, geometric and variational.
//! * [`billiard_nd`]: billiards in ellipsoids through the generating function on
//!   pairs of directions.
//! * [`geodesic`], [`chords`]: geodesics on convex surfaces in R³ and the chord
//!   correspondence between them.

// `!(x < tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard2d;
pub mod billiard_nd;
pub mod chords;
pub mod error;
pub mod geodesic;
pub mod gutkin;
pub mod quadrature;
pub mod stencil;
pub mod support;
pub mod table_file;
pub mod trig;

pub use error::{Error, Result};
