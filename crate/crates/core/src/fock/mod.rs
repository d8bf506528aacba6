//! Two-mode quantum model in a truncated photon-number basis.

mod eigen;
mod hamiltonian;
mod state;
mod wigner;

pub use eigen::{
    converged_eigenmodes, excited_state, ground_state, ground_state_with, lanczos_lowest,
    low_spectrum, numeric_eigenmodes, numeric_eigenmodes_with, EigenOptions, Eigenstate,
};
pub use hamiltonian::{build_hamiltonian, build_hamiltonian_with, Coupling, Hamiltonian, Parity};
pub use state::{
    fock_distribution, mean_photon, odd_parity_probability, reduced_density, von_neumann_entropy,
    DensityMatrix, GroundStateSummary,
};
pub use wigner::{wigner, QuadratureGrid, WignerGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the product-basis dimension.
pub const DEFAULT_DIM_CAP: usize = 10_000;

/// Photon-number cutoffs of the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedFockSpace {
    pub n_a_max: usize,
    pub n_b_max: usize,
    pub dim_cap: usize,
}

impl TruncatedFockSpace {
    pub fn new(n_a_max: usize, n_b_max: usize) -> Result<Self> {
        Self::with_cap(n_a_max, n_b_max, DEFAULT_DIM_CAP)
    }

    /// Same cutoff on both modes.
    pub fn square(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, cutoff)
    }

    pub fn with_cap(n_a_max: usize, n_b_max: usize, dim_cap: usize) -> Result<Self> {
        if n_a_max < 2 || n_b_max < 2 {
            return Err(Error::invalid("cutoff", "each mode needs a cutoff of at least 2"));
        }
        let dim = (n_a_max + 1) * (n_b_max + 1);
        if dim > dim_cap {
            return Err(Error::DimensionCap { dim, cap: dim_cap });
        }
        Ok(Self {
            n_a_max,
            n_b_max,
            dim_cap,
        })
    }

    /// Default cutoff for a coupling ratio: 30 up to g/omega = 0.3, 50 beyond.
    pub fn for_ratio(ratio: f64) -> Result<Self> {
        Self::square(if ratio.abs() <= 0.3 { 30 } else { 50 })
    }

    pub fn dim(&self) -> usize {
        (self.n_a_max + 1) * (self.n_b_max + 1)
    }

    pub fn mode_dims(&self) -> [usize; 2] {
        [self.n_a_max + 1, self.n_b_max + 1]
    }

    #[inline]
    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * (self.n_b_max + 1) + n_b
    }

    #[inline]
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / (self.n_b_max + 1), index % (self.n_b_max + 1))
    }
}

/// One of the two resonators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}
