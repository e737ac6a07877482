//! Reconstruction of a-priori-unknown initial states of diffusion-type
//! evolution (classical, time-fractional, and hyperbolic) from the field
//! observed at a later time, on homogeneous and piecewise-homogeneous real
//! axes.
//!
//! The backward problem is a Fredholm equation of the first kind and is
//! ill-posed; the library tames it two ways and cross-validates them:
//!
//! * series reconstruction f = Σ_j u_j/j! · H_{jn} over generalized
//!   Hermite bases built by jet (truncated-series) extraction from the
//!   medium's eigenfunctions, with Taylor coefficients u_j estimated from
//!   the observed field;
//! * spectral-cutoff inversion through the direct/conjugate eigenfunction
//!   transform pair with the amplifying multiplier truncated at |λ| ≤ Λ.
//!
//! Every inverse path is validated against an independent forward solver
//! (spectral multiplier, interface-aware Crank–Nicolson, d'Alembert,
//! Poisson half-plane). See the `selftest` module / `retroheat selftest`
//! for the full criteria suite.

pub mod basis;
pub mod dirichlet;
pub mod error;
pub mod field;
pub mod forward;
pub mod inverse;
pub mod jet;
pub mod linalg;
pub mod media;
pub mod scenario;
pub mod selftest;
pub mod special;

pub use error::{Error, Result};
