//! Symplectically self-polar convex bodies in `R^{2n}` and their symplectic
//! outer billiards.
//!
//! Bodies are evaluator bundles: a gauge (Minkowski functional) together with
//! analytic or finite-difference derivatives. On top of that the crate builds
//! the characteristic map `f(x) = J∇G(x)`, the outer billiard map `T`, the
//! invariant hypersurface `Y = {x + f(x)}` and a handful of area and volume
//! diagnostics.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, threading and
//! the command line live in the `osb` companion crate.
#![no_std]

extern crate alloc;

pub mod billiard;
pub mod bodies;
pub mod convex;
pub mod error;
pub mod hypersurface;
pub mod linalg;
pub mod measure;
mod newton;
pub mod rng;
pub mod symplectic;

pub use bodies::{realize, BodySpec};
pub use convex::{BoundaryPoint, ConvexBody, Gauge, Smoothness, ToleranceConfig};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
