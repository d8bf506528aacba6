use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::Eigenstate;
use super::Mode;
use crate::error::{Error, Result};

const BLOB_MAGIC: &[u8; 4] = b"RHO1";

/// Density matrix over a product of truncated number bases.
///
/// `dims` lists the local dimension of every mode in the product, most
/// significant first, so a two-mode state has `dims = [n_a_max+1, n_b_max+1]`
/// and a single reduced mode has one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dims: Vec<usize>,
    pub entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &DVector<Complex64>, dims: Vec<usize>) -> Self {
        let entries = psi * psi.adjoint();
        Self { dims, entries }
    }

    pub fn from_real_pure(psi: &DVector<f64>, dims: Vec<usize>) -> Self {
        Self::from_pure(&psi.map(|x| Complex64::new(x, 0.0)), dims)
    }

    /// Single-mode number state `|n>` in a basis of size `dim`.
    pub fn fock(n: usize, dim: usize) -> Self {
        let mut psi = DVector::zeros(dim);
        psi[n] = 1.0;
        Self::from_real_pure(&psi, vec![dim])
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Checks Hermiticity, unit trace and positivity to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.dim();
        if self.dims.iter().product::<usize>() != n || self.entries.ncols() != n {
            return Err(Error::invalid("density matrix", "shape does not match mode dimensions"));
        }
        let herm = (&self.entries - self.entries.adjoint()).map(|z| z.norm()).max();
        if herm > tol {
            return Err(Error::invalid("density matrix", format!("not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::invalid("density matrix", format!("trace {tr}")));
        }
        let lowest = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if lowest < -tol {
            return Err(Error::invalid(
                "density matrix",
                format!("negative eigenvalue {lowest:.3e}"),
            ));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    /// Little-endian blob: `RHO1`, `u32` mode count, one `u32` per mode
    /// dimension, then `(re, im)` `f64` pairs in row-major order.
    pub fn write_blob<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BLOB_MAGIC)?;
        w.write_all(&(self.dims.len() as u32).to_le_bytes())?;
        for d in &self.dims {
            w.write_all(&(*d as u32).to_le_bytes())?;
        }
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.entries[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_blob<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BLOB_MAGIC {
            return Err(Error::Format("not a density-matrix blob".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let modes = u32::from_le_bytes(word) as usize;
        if modes == 0 || modes > 8 {
            return Err(Error::Format(format!("unsupported mode count {modes}")));
        }
        let mut dims = Vec::with_capacity(modes);
        for _ in 0..modes {
            r.read_exact(&mut word)?;
            dims.push(u32::from_le_bytes(word) as usize);
        }
        let n: usize = dims.iter().product();
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut buf)?;
            Ok(f64::from_le_bytes(buf))
        };
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = next(&mut r)?;
                let im = next(&mut r)?;
                entries[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(Self { dims, entries })
    }
}

/// Partial trace of a two-mode state over the mode not kept.
pub fn reduced_density(rho: &DensityMatrix, keep: Mode) -> DensityMatrix {
    assert_eq!(rho.dims.len(), 2, "reduced_density expects a two-mode state");
    let (da, db) = (rho.dims[0], rho.dims[1]);
    let idx = |a: usize, b: usize| a * db + b;
    match keep {
        Mode::A => {
            let mut out = DMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    out[(i, j)] = (0..db).map(|k| rho.entries[(idx(i, k), idx(j, k))]).sum();
                }
            }
            DensityMatrix { dims: vec![da], entries: out }
        }
        Mode::B => {
            let mut out = DMatrix::zeros(db, db);
            for i in 0..db {
                for j in 0..db {
                    out[(i, j)] = (0..da).map(|k| rho.entries[(idx(k, i), idx(k, j))]).sum();
                }
            }
            DensityMatrix { dims: vec![db], entries: out }
        }
    }
}

/// Diagonal of a single-mode state in the number basis.
pub fn fock_distribution(rho: &DensityMatrix) -> Vec<f64> {
    (0..rho.dim()).map(|n| rho.entries[(n, n)].re).collect()
}

/// `Tr[rho a^dag a]` for a single-mode state.
pub fn mean_photon(rho: &DensityMatrix) -> f64 {
    fock_distribution(rho)
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// Probability of an odd total photon number in a state of any mode count.
pub fn odd_parity_probability(rho: &DensityMatrix) -> f64 {
    let mut total = 0.0;
    for i in 0..rho.dim() {
        let mut rest = i;
        let mut photons = 0;
        for d in rho.dims.iter().rev() {
            photons += rest % d;
            rest /= d;
        }
        if photons % 2 == 1 {
            total += rho.entries[(i, i)].re;
        }
    }
    total
}

/// `-Tr[rho log2 rho]` in bits; eigenvalues below 1e-14 count as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > 1e-14)
        .map(|l| -l * l.log2())
        .fold(0.0, |s, x| s + x)
}

/// Photon statistics and entanglement of one eigenstate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateSummary {
    /// `E / hbar` [rad/s]
    pub energy: f64,
    pub cutoff: [usize; 2],
    pub n_a: f64,
    pub n_b: f64,
    pub entropy_a: f64,
    pub purity_a: f64,
    pub odd_parity: f64,
    /// Largest population on the last kept level of either mode.
    pub edge_population: f64,
    pub fock_a: Vec<f64>,
}

impl GroundStateSummary {
    pub fn from_state(state: &Eigenstate) -> Self {
        let rho = state.density();
        let ra = reduced_density(&rho, Mode::A);
        let rb = reduced_density(&rho, Mode::B);
        let pa = fock_distribution(&ra);
        let pb = fock_distribution(&rb);
        Self {
            energy: state.energy,
            cutoff: [state.space.n_a_max, state.space.n_b_max],
            n_a: mean_photon(&ra),
            n_b: mean_photon(&rb),
            entropy_a: von_neumann_entropy(&ra),
            purity_a: ra.purity(),
            odd_parity: odd_parity_probability(&rho),
            edge_population: pa[pa.len() - 1].max(pb[pb.len() - 1]),
            fock_a: pa,
        }
    }
}
