//! Finite-element laboratory for anisotropic variational Dirichlet problems.
//!
//! The crate minimizes splitting-type and (p,q)-growth energies on structured
//! 2D meshes and measures the weighted regularity quantities attached to the
//! minimizers: distance-weighted integrability of the gradient, Hölder
//! coefficients near the boundary, and Caccioppoli ratios with small weights.

pub mod cli;
pub mod energy;
pub mod exponents;
pub mod geometry;
pub mod report;
pub mod solver;
pub mod verify;

pub use energy::{BoundaryDatum, Density, EnergyDensity};
pub use exponents::{ExponentBundle, PQExponents, SplitExponents};
pub use geometry::{build_mesh, DomainMesh, DomainSpec, ScalarField, Shape};
pub use solver::{solve, SolveResult, SolverConfig};
