//! Half-space KPZ models: last-passage percolation, polymers, TASEP and the
//! parabolic Anderson model in a half-space, with Monte Carlo verification suites.
pub mod env;
pub mod error;
pub mod horizon;
pub mod lpp;
pub mod pam;
pub mod polymer;
pub mod rng;
pub mod scaling;
pub mod tasep;
pub mod verify;
pub use env::{EnvironmentSpec, Kind, LazyField, SeededSource, WeightField, Weights, Window};
pub use error::{Error, Result};
pub use lpp::{Constraint, PassageQuery, PassageResult, Point};
