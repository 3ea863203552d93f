//! Integer quaternion lattices acting on products of trees.
//!
//! Builds the square-complex presentations of the groups generated by the
//! integer quaternions of norm `p` and `l`, abelianizes them (and two finite
//! index subgroups) with exact Smith normal form, and checks the results
//! against the conjectured case splits over ranges of primes.

pub mod classification;
pub mod error;
pub mod harness;
pub mod presentation;
pub mod primes;
pub mod quaternion;
pub mod subgroups;
pub mod zmodule;

pub use classification::{CaseLabel, PrimePair};
pub use error::{Error, Result};
pub use presentation::{GroupPresentation, Letter, Word};
pub use quaternion::{HalfSet, NormSet, Quaternion};
pub use zmodule::{AbelianGroup, IntMatrix};
