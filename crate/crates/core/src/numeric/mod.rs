//! Exact and refinable arithmetic shared by every other module.

pub mod interval;
pub mod literal;
pub mod real;
pub mod torus;

pub use interval::{Interval, Tri};
pub use literal::{parse_real, parse_vector, split_top_level};
pub use real::{parse_rational, Approximate, Precision, Real};
pub use torus::{affine_orbit_point, torus_dist, weighted_dist, weighted_gauge, Exponent, TorusVector, Weights};
