//! Pseudo-spectral geodesic flows of right-invariant Fourier-multiplier
//! metrics on the diffeomorphism group of the circle.
//!
//! The library represents real periodic fields by truncated Fourier
//! series (period `2*pi`, basis `exp(ikx)`), Fourier multipliers by
//! their symbols, and circle diffeomorphisms by periodic displacements.
//! On top of that it provides the Euler equation and geodesic spray of the
//! induced right-invariant metric, constrained flows on the one- and
//! three-point homogeneous spaces, the Riemannian exponential/log maps,
//! and the verification oracles exercised by the test suites and the
//! `difflow` CLI.

mod dd;
pub mod diffeo;
pub mod error;
pub mod expmap;
pub mod geodesic;
pub mod homogeneous;
pub mod multi_symbol;
pub mod multiplier;
pub mod sampling;
pub mod scalar;
mod solve;
pub mod spectral;
pub mod verify;

pub use diffeo::Diffeo;
pub use error::{Error, Result};
pub use geodesic::{Diagnostics, EulerState, GeodesicState, IntegratorConfig, Trajectory};
pub use homogeneous::{Constraint, ConstraintKind};
pub use multiplier::{MultiplierSymbol, SymbolConditionReport};
pub use scalar::Scalar;
pub use spectral::{GridSpec, PeriodicField};

/// Default working scalar.
pub type Real = f64;
/// Periodic field over the default scalar.
pub type Field = PeriodicField<Real>;
/// Multiplier symbol over the default scalar.
pub type Symbol = MultiplierSymbol<Real>;
