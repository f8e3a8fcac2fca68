//! Configuration design of mechanical assemblies: a bivariate EDA with Gibbs
//! sampling, a constraint-programming repair operator, and fitness evaluators.
#![allow(clippy::needless_range_loop)]

pub mod cp;
pub mod eda;
pub mod error;
pub mod fitness;
pub mod harness;
pub mod model;
pub mod repair;
