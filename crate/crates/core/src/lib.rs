//! Exact best simultaneous Diophantine approximation over periodic lattices.
//!
//! For a lattice `Λ`, a rational vector `α` and a bound `Q`, the periodic
//! lattice `Λ(α,Q) = Λ ∪ (α+Λ) ∪ … ∪ (Qα+Λ)` collects all rational
//! approximations with denominator at most `Q`. This crate computes its
//! successive minima with respect to a 0-symmetric convex body exactly,
//! together with the Jurkat–Kratz variant, the dual-lattice quantity `γ`,
//! packing and Blichfeldt-type witnesses, and checks the Minkowski-type
//! inequalities relating them.

pub mod error;
pub mod exactnum;
pub mod geometry;
pub mod lattice;
pub mod linalg;
pub mod oracles;
pub mod periodic;
pub mod verify;

pub use error::{Error, Result};
