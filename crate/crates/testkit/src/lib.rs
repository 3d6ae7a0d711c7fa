//! Shared fixtures and independent oracles for the test suites.
//!
//! Nothing here calls into the solver or fusion code it is used to check:
//! the LP oracle is a generic dense simplex, and the fusion oracles work
//! from a dense adjacency matrix.

pub mod fixtures;
pub mod lp;
pub mod oracles;
pub mod synthetic;
