use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::TruncatedFockSpace;
use crate::circuit::ModeCoefficients;
use crate::error::{Error, Result};

/// Form of the resonator-resonator coupling term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Coupling {
    /// `-g (a^dag - a)(b^dag - b)`.
    #[default]
    Full,
    /// Photon exchange only, `g (a^dag b + a b^dag)`.
    Rwa,
}

/// Joint photon-number parity `(-1)^(n_a + n_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// `H / hbar` [rad/s] on the truncated product basis, stored as sparse rows.
///
/// Every coupling term changes `n_a + n_b` by 0 or 2, so the matrix is block
/// diagonal in joint parity.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub space: TruncatedFockSpace,
    pub coefficients: ModeCoefficients,
    pub coupling: Coupling,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

pub fn build_hamiltonian(c: &ModeCoefficients, space: TruncatedFockSpace) -> Result<Hamiltonian> {
    build_hamiltonian_with(c, space, Coupling::Full)
}

pub fn build_hamiltonian_with(
    c: &ModeCoefficients,
    space: TruncatedFockSpace,
    coupling: Coupling,
) -> Result<Hamiltonian> {
    if !(c.omega_a > 0.0 && c.omega_b > 0.0 && c.g_r.is_finite()) {
        return Err(Error::invalid("coefficients", "mode frequencies must be positive"));
    }
    let dim = space.dim();
    if dim > space.dim_cap {
        return Err(Error::DimensionCap {
            dim,
            cap: space.dim_cap,
        });
    }
    let (na_max, nb_max) = (space.n_a_max, space.n_b_max);
    let g = c.g_r;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(5 * dim);
    let mut vals = Vec::with_capacity(5 * dim);
    row_ptr.push(0);
    let sq = |n: usize| (n as f64).sqrt();
    for i in 0..dim {
        let (na, nb) = space.levels(i);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(5);
        row.push((
            i,
            c.omega_a * (na as f64 + 0.5) + c.omega_b * (nb as f64 + 0.5),
        ));
        // <na+1, nb-1| a^dag b |na, nb> and its adjoint a b^dag, coefficient +g in both forms
        if na < na_max && nb > 0 {
            row.push((space.index(na + 1, nb - 1), g * sq(na + 1) * sq(nb)));
        }
        if na > 0 && nb < nb_max {
            row.push((space.index(na - 1, nb + 1), g * sq(na) * sq(nb + 1)));
        }
        if coupling == Coupling::Full {
            // -g a^dag b^dag and -g a b
            if na < na_max && nb < nb_max {
                row.push((space.index(na + 1, nb + 1), -g * sq(na + 1) * sq(nb + 1)));
            }
            if na > 0 && nb > 0 {
                row.push((space.index(na - 1, nb - 1), -g * sq(na) * sq(nb)));
            }
        }
        row.sort_by_key(|e| e.0);
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(Hamiltonian {
        space,
        coefficients: *c,
        coupling,
        row_ptr,
        cols,
        vals,
    })
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn element(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|(c, _)| *c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()),
        )
    }

    pub fn parity_of(&self, index: usize) -> Parity {
        let (a, b) = self.space.levels(index);
        if (a + b) % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Basis indices of one parity sector, ascending.
    pub fn sector(&self, parity: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parity_of(i) == parity).collect()
    }

    /// Dense restriction of `H` to a set of basis indices.
    pub fn block(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let n = indices.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &i) in indices.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    m[(k, pos[j])] = v;
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs() -> ModeCoefficients {
        ModeCoefficients::new(5.0, 5.7, 0.9)
    }

    #[test]
    fn cross_term_matrix_element() {
        let s = TruncatedFockSpace::square(4).unwrap();
        let h = build_hamiltonian(&coeffs(), s).unwrap();
        // <1,0|H|0,1> = +g
        assert_eq!(h.element(s.index(1, 0), s.index(0, 1)), 0.9);
        // <1,1|H|0,0> = -g
        assert_eq!(h.element(s.index(1, 1), s.index(0, 0)), -0.9);
        let r = build_hamiltonian_with(&coeffs(), s, Coupling::Rwa).unwrap();
        assert_eq!(r.element(s.index(1, 1), s.index(0, 0)), 0.0);
        assert_eq!(r.element(s.index(1, 0), s.index(0, 1)), 0.9);
    }

    #[test]
    fn exactly_symmetric() {
        let s = TruncatedFockSpace::new(6, 4).unwrap();
        let m = build_hamiltonian(&coeffs(), s).unwrap().to_dense();
        assert_eq!(&m, &m.transpose());
    }

    #[test]
    fn parity_blocks_decouple() {
        let s = TruncatedFockSpace::square(5).unwrap();
        let h = build_hamiltonian(&coeffs(), s).unwrap();
        for i in 0..h.dim() {
            for (j, _) in h.row(i) {
                assert_eq!(h.parity_of(i), h.parity_of(j));
            }
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let s = TruncatedFockSpace::new(4, 3).unwrap();
        let h = build_hamiltonian(&coeffs(), s).unwrap();
        let x = DVector::from_fn(h.dim(), |i, _| (i as f64 * 0.37).sin());
        let y = h.matvec(&x);
        let z = h.to_dense() * &x;
        assert!((y - z).norm() < 1e-12);
    }
}
