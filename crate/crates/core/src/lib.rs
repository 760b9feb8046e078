//! Random `±alpha` rotations on the circle.
//!
//! The crate couples three kinds of evidence about additive functionals
//! `phi(Y_1) + ... + phi(Y_n)` of the chain `Y_{i+1} = Y_i ± alpha`:
//!
//! * Fourier-side diagnostics (`spectral`): eigenvalues of the transfer
//!   operator, Poisson-equation solutions, Kipnis-Varadhan partial sums.
//! * Exact finite computations (`chain`, `construct`): circulant spectra for
//!   rational angles and certified inductive constructions whose every
//!   inequality is decided in rational arithmetic.
//! * Seeded, thread-count independent Monte Carlo (`walk`).

pub mod chain;
pub mod circle;
pub mod construct;
pub mod diophantine;
pub mod error;
pub mod exact;
pub mod observable;
pub mod spectral;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
