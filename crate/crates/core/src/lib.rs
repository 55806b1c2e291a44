//! Symbolic checker for the inverse problem of the calculus of variations
//! for time-dependent second-order ODE systems.
//!
//! A system `x'' + 2G(t, x, x') = 0` is represented as a [`semispray::Semispray`]
//! on the first jet bundle with coordinates `(t, x^i, y^i)`. The [`helmholtz`]
//! module decides whether a supplied semi-basic 1-form makes it a Lagrangian
//! system and extracts the Lagrangian, first integral and dual symmetry.

pub mod expr;
pub mod forms;
pub mod geodesic;
pub mod helmholtz;
pub mod identities;
pub mod random;
pub mod semispray;
