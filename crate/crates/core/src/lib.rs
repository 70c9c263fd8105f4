//! Global optimisation on compact symmetric spaces through the Riemannian
//! barycentre of a Gibbs distribution.
//!
//! The optimiser samples `P_T ∝ exp(-U/T)` with a symmetric
//! Metropolis-Hastings chain and tracks the running barycentre of the samples
//! with the recursive geodesic update `x_n = x_{n-1} #_{1/n} z_n`. When `U` is
//! invariant under the geodesic symmetry about its minimiser and `T` is below
//! an explicitly computable threshold, that barycentre is the minimiser.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod annealing;
pub mod barycentre;
pub mod error;
pub mod experiment;
pub mod manifold;
pub mod objective;
pub mod profile;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod temperature;
pub mod verify;

pub use error::{Error, Result};
