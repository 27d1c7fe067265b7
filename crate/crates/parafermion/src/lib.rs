//! Exact, desk-scale checks of discretely holomorphic parafermionic
//! observables in three lattice loop models: the dense loop model of the
//! Potts model, the dilute O(n) model and a two-colour dense loop model.

pub mod cft;
pub mod cli;
pub mod enumeration;
pub mod geometry;
pub mod holo_solver;
pub mod json;
pub mod models;
pub mod ybe;
