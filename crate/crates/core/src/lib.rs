//! Numerical verification that crypto-nonlocal hidden-variable models of
//! maximally entangled states have vanishing local parts.
//!
//! Observables are stored as real coefficient vectors in a Hermitian operator
//! basis adapted to the Schmidt basis of the state, so that joint averages
//! reduce to dot products. The [`theorem`] module chains per-step bounds along
//! a rotation curve from `a` to `-a` and checks them by seeded Monte Carlo.

pub mod cli;
pub mod curve;
pub mod decomposition;
pub mod error;
pub mod hvmodels;
pub mod operators;
pub mod random;
pub mod sampling;
pub mod states;
pub mod theorem;

pub use error::{Error, Result};
