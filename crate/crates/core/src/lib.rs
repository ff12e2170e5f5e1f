//! Numerical kernel for uniform phase-space scaling maps of s-ordered
//! quasiprobabilities on a single bosonic mode.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! algorithms: a truncated Fock-space kernel, harmonic-resolved polar
//! quadrature for characteristic functions, the channel zoo (scaling maps,
//! classical noise, quantum-limited attenuator and amplifier), an exact
//! Gaussian covariance fast path, positivity and complete-positivity
//! certificates, and the analytic phase-diagram classifier.
//!
//! Conventions used throughout:
//!
//! * `χ_s(ξ) = exp(s|ξ|²/2) Tr(ρ D(ξ))` with `D(ξ) = exp(ξa† − ξ*a)`.
//! * `Λ_s(α) = π⁻² ∫ exp(αξ* − α*ξ) χ_s(ξ) d²ξ`, so that `∫Λ_s d²α = χ_s(0)`.
//! * Gaussian covariances are normalised so that the vacuum has `V = 𝟙`.
//!
//! IO, file formats, parallel sweeps and the command-line frontend live in
//! the `quasiscale` companion crate.
//!
//! Float methods go through `num_traits::Float` (backed by `libm`); those
//! imports turn redundant whenever `std` is linked, hence the local allows.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod certify;
pub mod channels;
mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod phase;
pub mod quasiprob;
pub mod special;

pub use error::{Error, Result};

pub use num_complex::Complex64;
