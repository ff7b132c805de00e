//! Divide-and-conquer ground-state search for sparse Ising and QUBO models.
//!
//! The central pipeline partitions a problem graph along its bottleneck edges
//! (weighted Girvan–Newman bipartition), collects each side's low-energy
//! configurations within a provable energy window, and merges the partial
//! solutions across the boundary. Around that sit a Metropolis simulated
//! annealer, exact enumeration oracles, tree-structured variable elimination,
//! instance generators (integer-factorization QUBOs, Kagome lattices, chains),
//! and a benchmark harness built on a time-to-solution figure of merit.
//!
//! Core math is generic over the scalar type via [`Scalar`]; the crate root
//! exposes `f64`/`f32` aliases for the common instantiations.

pub mod bench;
pub mod error;
pub mod model;
pub mod partition;
pub mod pfe;
pub mod problems;
pub mod reduction;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Scalar type for model coefficients and energies.
///
/// Implemented by `f32` and `f64`; anything satisfying the bounds works.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + Debug
        + Display
        + Default
        + Sum
        + Send
        + Sync
        + 'static
{
}

/// Absolute tolerance for energy comparisons, unless an operation states otherwise.
pub(crate) fn tol<T: Scalar>() -> T {
    T::from_f64(1e-9).unwrap()
}

pub type IsingModel64 = model::IsingModel<f64>;
pub type IsingModel32 = model::IsingModel<f32>;
pub type QuboModel64 = model::QuboModel<f64>;
pub type QuboModel32 = model::QuboModel<f32>;
pub type Partition64 = partition::Partition<f64>;
pub type AnnealParams64 = solvers::AnnealParams<f64>;
pub type LocalSolutionSet64 = solvers::LocalSolutionSet<f64>;
pub type ChainReduction64 = reduction::ChainReduction<f64>;
pub type PfeConfig64 = pfe::PfeConfig<f64>;
pub type PfeResult64 = pfe::PfeResult<f64>;
pub type FactorEncoding64 = problems::FactorEncoding<f64>;
pub type LatticeSpec64 = problems::LatticeSpec<f64>;
