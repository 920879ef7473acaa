//! Two-system of a Hamiltonian system.
//!
//! For a Hamiltonian flow `ẋ = J H′(x)` on ℝ²ⁿ the two-system couples the
//! phase point to a matrix `Φ ∈ sp(2n, ℝ)`:
//!
//! ```text
//! ẋ = J (H(x) − ½ tr(A(x) Φ))′,    Φ̇ = [A(x), Φ],    A(x) = H″(x) J.
//! ```
//!
//! The crate is `no_std` (with `alloc`). It provides the Hamiltonian model and
//! its exact derivatives ([`model`]), the right-hand sides of the base,
//! variational, vector, matrix and multivector forms ([`dynamics`]), the
//! degenerate Lie-Poisson bracket and its Casimirs ([`poisson`]), signature
//! and rank decompositions of the moment matrix ([`structure`]), explicit
//! Runge-Kutta integration with invariant monitoring ([`integrate`]) and the
//! closed-form integrable cases ([`oracles`]).
//!
//! Internally the matrix variable is carried as the moment matrix
//! `M = −JΦ`, which is symmetric exactly when `Φ ∈ sp(2n, ℝ)`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod poisson;
pub mod structure;

pub use error::{Error, Result};

pub use dynamics::{MultiVectorState, TwoState, VectorFormState};
pub use integrate::{FormTag, IntegratorConfig, InvariantReport, Method, Sampling, State, Trajectory};
pub use linalg::{Mat, Vector};
pub use model::{HamiltonianModel, MonomialTerm, Polynomial};
pub use structure::Signature;
