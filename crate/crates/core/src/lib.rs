//! Ergodic and mixing behaviour of non-autonomous compositions of inner
//! functions fixing the origin.
//!
//! A sequence `g_1, g_2, ...` of finite Blaschke products (or rotations) with
//! `g_n(0) = 0` generates the compositions `G_n = g_n ∘ ⋯ ∘ g_1`. Whether the
//! boundary maps `Ĝ_n` are ergodic or mixing on the unit circle is decided by
//! the derivatives `g_n'(0)` alone. This crate provides two independent views:
//!
//! * [`criteria`] evaluates the derivative-based criteria exactly from a
//!   [`DerivativeLedger`], and
//! * [`boundary`] checks the same statements by Monte Carlo sampling and
//!   quadrature of the boundary dynamics.
//!
//! The two views meet in a handful of identities (for example the squared
//! norm of ergodic averages equals `1/N + 2·S_N(ℓ)`), which is what the
//! verification suites lean on.

pub mod boundary;
pub mod catalog;
pub mod criteria;
pub mod disk;
mod error;
pub mod family;
pub mod ledger;
pub mod rng;
pub mod sum;
mod turn;

pub use num_complex::Complex64 as Complex;

pub use error::{Error, Result};
pub use family::{Distribution, FamilySpec, InnerSequence};
pub use ledger::DerivativeLedger;
pub use disk::{Arc, BlaschkeFactor, InnerMap, UnitComplex};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
