//! Core algorithms for dynamics of meromorphic maps given as expression
//! trees: parsing and symbolic differentiation, outward-rounded interval
//! arithmetic with certified sign decisions, pole-aware orbit iteration on
//! the sphere, fixed-point/multiplier analysis, basin classification and a
//! pixel-level Julia connectivity probe.
//!
//! The crate is `no_std` (allocation required); all IO, file formats and the
//! command-line front end live in the companion `bovdyn` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod basin;
pub mod checkers;
pub mod expr;
pub mod interval;
pub mod math;
pub mod sphere;

pub use expr::{EvalOutcome, MapExpr, ParseError};
pub use interval::{Interval, SignCertificate, SignVerdict};
pub use sphere::{chordal_distance, iterate_orbit, OrbitConfig, OrbitFate, OrbitResult};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
