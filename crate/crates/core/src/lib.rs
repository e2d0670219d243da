//! Simulation and numerical-verification toolkit for partial sums of random
//! multiplicative functions.
//!
//! * [`sieve`]: smallest-prime-factor tables, prime lists, segmented squarefree blocks
//! * [`rmf`]: seeded prime values, `f(n)`, streaming walks `M(x)` in 1D and 2D
//! * [`analysis`]: sign changes with drift, visits, 2D zero hits, weighted integrals
//! * [`dirichlet`]: zeta, truncated `F(s)`, prime sums, variance, log-F expansion, scans
//! * [`stats`]: normal CDF, KS distance, tail frequencies, growth fits

pub mod analysis;
pub mod dirichlet;
pub mod error;
pub mod kahan;
mod quad;
pub mod rmf;
pub mod sieve;
pub mod stats;

pub use error::{Error, Result};
pub use rmf::{GaussInt, Model, PrimeSignAssignment, Unit, WalkPoint, WalkSeries, WalkStream};
pub use sieve::{build_spf, Factorization, MemoryCap, SpfTable};
