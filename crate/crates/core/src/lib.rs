//! Numerical toolkit for finite-group unitary representations and the
//! twirling channels they induce.
//!
//! The pipeline: build a [`group::FiniteGroup`], attach a unitary
//! [`rep::Representation`], split it into irreducible isotypic blocks with
//! [`decompose::isotypic_decomposition`], and feed the resulting multiplicity
//! and dimension vectors into [`invariants`] (independence number, code
//! dimension, orthogonality indices, zero-error capacity) and [`phase`]
//! (phase-retrievability bounds and witnesses). Every closed-form value is
//! paired with an explicit witness that is re-verified at machine precision,
//! so each reported number carries its own certificate.
//!
//! All numerics are dense complex linear algebra over `f64`, deterministic
//! for a fixed seed.

pub mod channel;
pub mod decompose;
pub mod error;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod group;
pub mod invariants;
pub mod jsonio;
pub mod linalg;
pub mod phase;
pub mod rep;
pub mod seeding;

pub use error::TwirlError;

/// Convenient result alias used across the crate.
pub type Result<T> = std::result::Result<T, TwirlError>;
