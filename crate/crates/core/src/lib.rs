//! Linear Hamiltonian flows on infinite-dimensional tori.
//!
//! A countable family of harmonic oscillators with frequencies `λ_k` moves
//! along the torus `∏ {|u_k| = r_k}` with `Σ r_k² < ∞`. This crate decides
//! the arithmetic of the frequencies exactly (relations, common bases,
//! periods), evolves points, estimates time and space averages of
//! characters, searches for return times and sorts trajectories into
//! periodic, transitive-projection and the remaining type.

// Range checks are written `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod ergodic;
pub mod error;
pub mod exec;
pub mod frequency;
pub mod lattice;
pub mod rational;
pub mod recurrence;
pub mod relation;
pub mod schema;
pub mod torus;

pub use error::{Error, Result};
pub use exec::Execution;
pub use frequency::{BasisSymbol, Family, FrequencySystem, FrequencyVector, Period, StrongMode};
pub use rational::Rational;
pub use torus::{Angle, FlowTime, LinearFlow, PhasePoint, TorusSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
