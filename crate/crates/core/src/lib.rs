//! Probability distributions with constant rate on discrete partially
//! ordered sets: exact incidence-algebra computations, tree
//! constructions, ladder-variable simulation with thinning, and a
//! linear-feasibility search for the constant-rate condition.

pub mod catalog;
pub mod dist;
pub mod finder;
pub mod incidence;
pub mod ladder;
pub mod par;
pub mod poset;
pub mod scalar;
pub mod sim;
pub mod simplex;
pub mod tree;

pub use poset::{ElementId, Poset, PosetError};
pub use scalar::{Rational, Scalar};
