//! Copositivity of second Symanzik polynomials.
//!
//! Given a Feynman graph and kinematic data, [`decide::decide`] either
//! certifies that the second Symanzik polynomial is strictly copositive (a
//! Pólya exponent), exhibits an exact positive rational point where it is
//! negative, or reports that neither was found within the configured limits.

pub mod decide;
pub mod error;
pub mod graph;
pub mod landau;
pub mod library;
pub mod poly;
pub mod polya;
pub mod polytope;
pub mod rational;
pub mod symanzik;

pub use error::{Error, Result};
pub use graph::{EdgeSet, FeynmanGraph};
pub use poly::{ParamPoly, SparsePoly};
pub use rational::Rational;
pub use symanzik::{FourLegBasis, KinematicParams};
