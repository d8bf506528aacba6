//! Simulation and fitting toolkit for a flux-tunable ultrastrong coupler
//! between two superconducting LC resonators.
//!
//! - [`circuit`]: classical circuit model, from junction phase to Hamiltonian coefficients
//! - [`fock`]: truncated two-mode Fock space, ground states, entropy and Wigner functions
//! - [`lindblad`]: driven steady-state response with port crosstalk
//! - [`fit`]: peak extraction and least-squares recovery of circuit parameters
//! - [`io`]: parameter files and CSV formats

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod fit;
pub mod fock;
pub mod io;
pub mod lindblad;
pub mod units;

pub use circuit::{
    eigenmodes, mode_coefficients, rwa_modes, CircuitParams, CoefficientRecord, FluxBias,
    ModeCoefficients, NormalModes, ThreeJunctionParams,
};
pub use error::{Error, Result};
