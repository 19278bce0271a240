//! Computational toolkit for the Möbius flow.
//!
//! The crate covers the arithmetic raw material (sieved tables of the Möbius,
//! Liouville and square-free functions), the combinatorics of admissible
//! supports modulo `p²`, the Mirsky measure of binary cylinders as truncated
//! Euler products, the Chowla measure on signed cylinders together with the
//! Walsh–Hadamard system that pins it down, Barker/circulant checks, empirical
//! correlation sums and a Monte Carlo sampler of the Chowla measure.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default). Every such loop also has a sequential path selected through
//! [`Parallelism`], and both paths produce bit-identical results.

pub mod admissible;
pub mod chowla;
pub mod empirical;
mod error;
pub mod mirsky;
pub mod par;
pub mod sampler;
pub mod sieve;
pub mod walsh;

pub use error::{Error, Result};
pub use par::Parallelism;
