//! Spectral statistics of 1d Schrödinger operators `H = -d²/dt² + V(t)` with
//! alloy-type decaying random potentials `V(t) = Σ ω(j) j^{-α} f(t - j)`.
//!
//! The crate integrates Prüfer phases cell by cell, locates Dirichlet
//! eigenvalues by Sturm oscillation counting, builds the rescaled eigenvalue
//! point process `ξ_n = Σ δ_{n(κ_j - κ_0)}`, and runs Monte Carlo experiments
//! that check clock convergence, Hölder continuity of the phase functional
//! `J`, moment decay of `R`, and decay of correlations of the amplitude
//! processes (including deterministic ones driven by symbolic dynamics).
//!
//! Module map:
//!
//! - [`amplitudes`]: amplitude sequences `ω(j)` (i.i.d., Markov, dynamical).
//! - [`dynsys`]: dyadic map, baker's map and the cat map, in exact arithmetic.
//! - [`potential`]: single-site profiles and the realized cell coefficients.
//! - [`prufer`]: the phase/amplitude integrator and its accumulators.
//! - [`spectrum`]: eigenvalue windows, relative phase, Laplace functionals.
//! - [`stats`]: the Monte Carlo experiment harness and reports.
//! - [`cli`]: the `clockspec` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod cli;
pub mod dynsys;
pub mod error;
pub mod potential;
pub mod prufer;
pub mod rng;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
