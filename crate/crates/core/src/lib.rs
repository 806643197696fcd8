//! Computational tools for inhomogeneous Diophantine approximation.
//!
//! The crate evaluates Kurzweil-type sums
//! `S_ℓ(x, y) = Σ_{n ≥ ℓ} min_{ℓ ≤ m ≤ n} ‖m x + y‖^d`
//! and their weighted and σ-exponent variants, enumerates best
//! inhomogeneous approximations, builds and checks witnesses `y` for
//! well-approximable `x`, manipulates approximation functions `ψ`, and
//! decides the rational case exactly.
//!
//! Arithmetic is exact on rationals and certified (interval based, with a
//! precision ladder) on everything else. Data-parallel loops go through
//! [`par`], which falls back to sequential code without the `parallel`
//! feature.

pub mod contfrac;
pub mod error;
pub mod exact;
pub mod numeric;
pub mod par;
pub mod psi;
pub mod records;
pub mod sums;
pub mod witness;

pub use error::{Error, Result};
pub use numeric::{Precision, Real, TorusVector, Weights};
