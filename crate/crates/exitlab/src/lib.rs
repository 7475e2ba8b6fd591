//! Numerical laboratory for the exit event from a metastable domain under
//! overdamped Langevin dynamics `dX = -∇f(X) dt + √h dB`.
//!
//! Three descriptions of the same exit event are implemented and
//! cross-validated against each other:
//!
//! * direct simulation of the dynamics with first-exit detection ([`sde`]),
//! * the quasi-stationary distribution and the principal Dirichlet eigenpair
//!   of the generator `-(h/2)Δ + ∇f·∇` ([`spectral`]),
//! * the reduced Markov jump model with Eyring-Kramers rates ([`rates`],
//!   [`kmc`]) and the temperature-accelerated-dynamics algorithm built on it
//!   ([`tad`]).
//!
//! [`landscape`] and [`agmon`] supply the geometric layer (critical points,
//! boundary saddles, basins, hypothesis checks, Agmon distances); [`harness`]
//! bundles the statistical validation suites; [`config`] and [`cli`] expose
//! everything as a single binary.

pub mod agmon;
pub mod band;
pub mod cli;
pub mod config;
pub mod grid;
pub mod harness;
pub mod kmc;
pub mod landscape;
pub mod potential;
pub mod quadrature;
pub mod rates;
pub mod sde;
pub mod spectral;
pub mod stats;
pub mod tad;

pub use grid::{DomainGrid, DomainShape};
pub use potential::PotentialField;

/// Tool version stamped into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
