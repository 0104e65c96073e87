//! Numerical laboratory for integral completeness criteria of exponential
//! systems.
//!
//! The crate evaluates windowed integral conditions on distributions of
//! exponents against convex-hull perimeters of target domains, and verifies
//! the radial subharmonic constructions and Riesz-mass inequalities behind
//! them on concrete test cases. Everything is a finite truncation: limit
//! superior / inferior functionals become grid estimates with explicit
//! windows and three-valued verdicts.
//!
//! Module map:
//! - [`geometry`]: convex hulls, perimeters, support functions, arc-length
//!   boundary measures;
//! - [`distributions`]: point distributions, radial counting, Stieltjes
//!   sums, density estimates;
//! - [`convexfun`]: convex decreasing weights and their C^2 smoothing
//!   stages;
//! - [`subharmonic`]: the radial profiles `F_R`, `V`, `V*` with closed-form
//!   Laplacian and normal-derivative bounds;
//! - [`riesz`]: Riesz-mass inequalities (annulus inequality and growth
//!   deficit) on concrete entire functions;
//! - [`criteria`]: grid evaluators for the completeness conditions;
//! - [`quad`]: adaptive Simpson and periodic trapezoid helpers;
//! - [`jsonout`]: deterministic JSON rendering with fixed float precision.

// Validation guards use the `!(x > 0.0)` form on purpose: unlike `x <= 0.0`
// it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexfun;
pub mod criteria;
pub mod distributions;
pub mod geometry;
pub mod jsonout;
pub mod quad;
pub mod riesz;
pub mod subharmonic;

pub use convexfun::{build_smoothing, ConvexDecreasingFunction, SmoothingSequence};
pub use distributions::{PointDistribution, RadialCounting};
pub use geometry::{convex_hull, ConvexBody, PlanePoint};
pub use subharmonic::{RadialSubharmonic, RadialWeight};
