//! Multivariate normality testing via statistical independence.
//!
//! The centerpiece is a normality test built on the Kac-Bernstein
//! characterization: for independent, identically distributed random
//! vectors X and Y, the pair (X−Y, X+Y) is independent exactly when the
//! common distribution is normal. Testing multivariate normality thereby
//! reduces to running a statistical independence test — here HSIC with a
//! gamma-approximated null — on sums and differences of the two halves of
//! the data.
//!
//! Alongside it: the Henze-Zirkler normality test as a classical baseline,
//! the Gram-matrix and special-function machinery both tests share, a
//! permutation oracle for the HSIC null, and seeded samplers for
//! Monte-Carlo power studies.

// Parameter checks are written `!(x > 0.0)` on purpose: the negation
// also routes NaN into the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod hsic;
pub mod hz;
pub mod kb;
pub mod kernel;
pub mod special;

pub use error::{Error, Result};
pub use hsic::{NullParams, PairedSample, TestOutcome};
pub use kb::{KbOptions, NullMode};
pub use kernel::{Bandwidth, KernelSpec, Sample};
