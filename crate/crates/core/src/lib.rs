//! Tools for studying interface rigidity in the three-dimensional clock model
//! with order-disorder boundary conditions.

pub mod column;
pub mod defects;
pub mod error;
pub mod experiment;
pub mod interface;
pub mod lattice;
pub mod observables;
pub mod planted;
pub mod sampler;
pub mod verifier;

pub use error::{Error, Result};
