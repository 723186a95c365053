//! Braid actions, Magnus series and free Lie Moore complexes on Milnor's F(S¹).
//!
//! The algebraic core is generic over the coefficient ring through
//! [`scalar::Coefficient`]; the aliases below fix the two rings used in
//! practice, the integers (arbitrary precision) and the prime fields.

pub mod braid;
pub mod check;
pub mod curtis;
pub mod error;
pub mod exactla;
pub mod lie;
pub mod magnus;
pub mod milnor;
pub mod scalar;
pub mod words;

pub use error::{Error, Result};
pub use scalar::{Coefficient, EuclideanRing, Fp, Integer, RingKind, F2, F3, F5, F7};
