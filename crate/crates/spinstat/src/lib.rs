//! Exact spin algebra for a pair of identical spin-s particles.
//!
//! Everything the coupled/uncoupled basis change needs lives in the field of
//! numbers `sign * sqrt(p/q)`, so Clebsch-Gordan tables, basis transforms,
//! parity, and particle exchange are computed without floating point and
//! compared with `==`. A closed-form factorial oracle cross-checks the
//! recurrence-built tables, a randomized harness measures the sign particle
//! exchange produces on arbitrary states (the spin-statistics sign
//! `(-1)^(2s)`), and a small rotation module covers the Wigner d-matrix
//! demonstrations, including the rotation-invariant singlet.
//!
//! The `spinstat` binary exposes tables, verification suites, and the
//! demonstrations on the command line with deterministic, seedable output.

pub mod cgc;
pub mod error;
pub mod exact;
pub mod exchange;
pub mod half_int;
pub mod rng;
pub mod rotations;
pub mod spin_space;
pub mod suites;

pub use error::{Error, Result};
pub use exact::SignedSqrtRational;
pub use half_int::HalfInt;
