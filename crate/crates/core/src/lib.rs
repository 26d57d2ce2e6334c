//! Convex hulls of planar Brownian motions and Brownian bridges.
//!
//! The crate computes the expected perimeter and area of the convex hull
//! spanned by `m` independent standard planar Brownian motions and `n`
//! independent standard planar Brownian bridges on `[0, 1]`, together with
//! the law of the time at which the combined maximum of their first
//! coordinates is attained. Three independent routes are provided:
//!
//! * [`analytic`]: closed forms for `m = n = 1` and the densities they come from;
//! * [`quadrature`]: an adaptive Gauss-Kronrod engine and the `(m, n)` tables;
//! * [`montecarlo`]: path simulation ([`process_sim`]) plus exact hull
//!   geometry ([`geometry`]) with confidence intervals and KS tests.
//!
//! [`validate`] bundles the cross-checks between the routes.

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod process_sim;
pub mod quadrature;
pub mod rng;
pub mod validate;

pub use error::{Error, Result};
pub use geometry::{convex_hull, ConvexPolygon, Point};
pub use process_sim::{ArgmaxRecord, EnsembleSpec, PlanarPath, ProcessCounts, ProcessKind, Winner};
pub use quadrature::{QuadSpec, Quadrature};
