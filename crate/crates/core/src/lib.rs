//! Coset complexes of finite matrix groups, F2 chain complexes, cone
//! functions, and exact expansion constants with their certified lower bounds.

pub mod algebra;
pub mod groups;
pub mod bits;
pub mod complex;
pub mod rational;
pub mod homology;
pub mod cones;
pub mod spectral;
pub mod expansion;
pub mod presentation;
