//! Desk-scale numerical laboratory for eigenvector mass fluctuations of
//! generalized Wigner matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] – dense symmetric eigendecomposition, resolvent and
//!   Stieltjes evaluations.
//! * [`semicircle`] – semicircle density, its Stieltjes transform, classical
//!   locations and the characteristic flow of the advection equation.
//! * [`ensembles`] – generalized Wigner / GOE samplers, the Ornstein–Uhlenbeck
//!   interpolation and a pathwise Dyson Brownian motion integrator.
//! * [`observables`] – test families, overlap tables `p_{kl}` and the scaled
//!   statistics built from them.
//! * [`matchings`] – particle configurations and perfect-matching /
//!   symmetrized moment observables.
//! * [`flowlab`] – rotation generator and the right-hand sides of the
//!   eigenvector moment flows, with pointwise residual checks.
//! * [`greenreg`] – entry replacement, micro-interval counting and the
//!   Poisson-regularized observables.
//! * [`harness`] – configuration-driven Monte Carlo experiments and the CLI.
//!
//! Indices are 0-based throughout the library API. The CLI accepts 1-based
//! eigenvalue indices.

pub mod ensembles;
mod error;
pub mod flowlab;
pub mod greenreg;
pub mod harness;
pub mod matchings;
pub mod observables;
pub mod quad;
pub mod rng;
pub mod semicircle;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
