use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use super::hamiltonian::{build_hamiltonian, Hamiltonian, Parity};
use super::state::DensityMatrix;
use super::TruncatedFockSpace;
use crate::circuit::{ModeCoefficients, NormalModes};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest parity block handled by dense diagonalization.
    pub dense_limit: usize,
    /// Relative residual target for the Lanczos path.
    pub tolerance: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 2600,
            tolerance: 1e-12,
            krylov_dim: 120,
            max_restarts: 40,
        }
    }
}

/// An energy eigenstate; `energy` is `E / hbar` [rad/s].
#[derive(Debug, Clone)]
pub struct Eigenstate {
    pub energy: f64,
    pub vector: DVector<f64>,
    pub parity: Parity,
    pub space: TruncatedFockSpace,
}

impl Eigenstate {
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_real_pure(&self.vector, self.space.mode_dims().to_vec())
    }
}

fn embed(h: &Hamiltonian, indices: &[usize], v: &DVector<f64>) -> DVector<f64> {
    let mut full = DVector::zeros(h.dim());
    for (k, &i) in indices.iter().enumerate() {
        full[i] = v[k];
    }
    full
}

/// Sorted dense eigenpairs of one parity sector, embedded in the full basis.
fn dense_sector(h: &Hamiltonian, parity: Parity, opts: &EigenOptions) -> Result<Vec<Eigenstate>> {
    let idx = h.sector(parity);
    if idx.len() > opts.dense_limit {
        return Err(Error::DimensionCap {
            dim: idx.len(),
            cap: opts.dense_limit,
        });
    }
    let eig = SymmetricEigen::new(h.block(&idx));
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .map(|k| Eigenstate {
            energy: eig.eigenvalues[k],
            vector: embed(h, &idx, &eig.eigenvectors.column(k).into_owned()),
            parity,
            space: h.space,
        })
        .collect())
}

fn lowest_in_sector(h: &Hamiltonian, parity: Parity, opts: &EigenOptions) -> Result<Eigenstate> {
    let idx = h.sector(parity);
    if idx.len() <= opts.dense_limit {
        return Ok(dense_sector(h, parity, opts)?.swap_remove(0));
    }
    let mut pos = vec![usize::MAX; h.dim()];
    for (k, &i) in idx.iter().enumerate() {
        pos[i] = k;
    }
    let matvec = |x: &DVector<f64>| {
        DVector::from_iterator(
            idx.len(),
            idx.iter().map(|&i| {
                h.row(i)
                    .filter(|(j, _)| pos[*j] != usize::MAX)
                    .map(|(j, v)| v * x[pos[j]])
                    .sum::<f64>()
            }),
        )
    };
    // Start on the lowest bare level of the sector.
    let diag: Vec<f64> = idx.iter().map(|&i| h.element(i, i)).collect();
    let lowest = (0..idx.len()).min_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap();
    let mut start = DVector::from_element(idx.len(), 1e-3);
    start[lowest] = 1.0;
    let (energy, v) = lanczos_lowest(idx.len(), matvec, start, opts)?;
    Ok(Eigenstate {
        energy,
        vector: embed(h, &idx, &v),
        parity,
        space: h.space,
    })
}

/// Lowest eigenpair of a symmetric operator given only matrix-vector products.
///
/// Lanczos with full reorthogonalization, restarted from the current Ritz
/// vector until the residual `|A x - theta x|` drops below `tolerance |theta|`.
pub fn lanczos_lowest(
    dim: usize,
    matvec: impl Fn(&DVector<f64>) -> DVector<f64>,
    start: DVector<f64>,
    opts: &EigenOptions,
) -> Result<(f64, DVector<f64>)> {
    let mut x = start.normalize();
    let mut last_residual = f64::INFINITY;
    let m_max = opts.krylov_dim.min(dim).max(1);
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<DVector<f64>> = vec![x.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..m_max {
            let mut w = matvec(&basis[j]);
            alpha.push(basis[j].dot(&w));
            for _ in 0..2 {
                for v in &basis {
                    let c = v.dot(&w);
                    w.axpy(-c, v, 1.0);
                }
            }
            let b = w.norm();
            if j + 1 == m_max || b < 1e-14 * alpha[j].abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w / b);
        }
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let k = (0..m)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .unwrap();
        let theta = eig.eigenvalues[k];
        let y = eig.eigenvectors.column(k);
        let mut ritz = DVector::zeros(dim);
        for (i, v) in basis.iter().take(m).enumerate() {
            ritz.axpy(y[i], v, 1.0);
        }
        ritz.normalize_mut();
        let r = matvec(&ritz) - &ritz * theta;
        last_residual = r.norm();
        x = ritz;
        if last_residual <= opts.tolerance * theta.abs().max(1.0) {
            return Ok((theta, x));
        }
    }
    Err(Error::NonConvergence {
        what: "Lanczos eigensolver",
        iterations: opts.max_restarts * m_max,
        residual: last_residual,
    })
}

/// Lowest eigenstate of `H`.
pub fn ground_state(h: &Hamiltonian) -> Result<Eigenstate> {
    ground_state_with(h, &EigenOptions::default())
}

pub fn ground_state_with(h: &Hamiltonian, opts: &EigenOptions) -> Result<Eigenstate> {
    let even = lowest_in_sector(h, Parity::Even, opts)?;
    let odd = lowest_in_sector(h, Parity::Odd, opts)?;
    Ok(if odd.energy < even.energy { odd } else { even })
}

/// The `count` lowest eigenstates over both parity sectors (dense only).
pub fn low_spectrum(h: &Hamiltonian, count: usize) -> Result<Vec<Eigenstate>> {
    let opts = EigenOptions::default();
    let mut all = dense_sector(h, Parity::Even, &opts)?;
    all.extend(dense_sector(h, Parity::Odd, &opts)?);
    all.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    all.truncate(count);
    Ok(all)
}

/// First excited eigenstate.
///
/// Near-degenerate candidates are ordered by overlap with the symmetric
/// single-photon state `(|1,0> + |0,1>) / sqrt 2`.
pub fn excited_state(h: &Hamiltonian) -> Result<Eigenstate> {
    let mut states = low_spectrum(h, 3)?;
    let scale = h.coefficients.omega_a.max(h.coefficients.omega_b);
    let s = h.space;
    let overlap = |e: &Eigenstate| {
        ((e.vector[s.index(1, 0)] + e.vector[s.index(0, 1)]) / 2f64.sqrt()).abs()
    };
    if (states[2].energy - states[1].energy).abs() < 1e-9 * scale
        && overlap(&states[2]) > overlap(&states[1])
    {
        states.swap(1, 2);
    }
    Ok(states.swap_remove(1))
}

fn raise(h: &Hamiltonian, v: &DVector<f64>, mode_a: bool) -> DVector<f64> {
    let s = h.space;
    let mut out = DVector::zeros(h.dim());
    for i in 0..h.dim() {
        let (na, nb) = s.levels(i);
        if mode_a && na < s.n_a_max {
            out[s.index(na + 1, nb)] += ((na + 1) as f64).sqrt() * v[i];
        } else if !mode_a && nb < s.n_b_max {
            out[s.index(na, nb + 1)] += ((nb + 1) as f64).sqrt() * v[i];
        }
    }
    out
}

fn lower(h: &Hamiltonian, v: &DVector<f64>, mode_a: bool) -> DVector<f64> {
    let s = h.space;
    let mut out = DVector::zeros(h.dim());
    for i in 0..h.dim() {
        let (na, nb) = s.levels(i);
        if mode_a && na > 0 {
            out[s.index(na - 1, nb)] += (na as f64).sqrt() * v[i];
        } else if !mode_a && nb > 0 {
            out[s.index(na, nb - 1)] += (nb as f64).sqrt() * v[i];
        }
    }
    out
}

/// Normal-mode frequencies read off the numerical spectrum.
///
/// Single creation and annihilation operators acting on the ground state only
/// reach the two one-quantum normal-mode states, so those are the excited
/// eigenstates carrying the largest transition weight
/// `sum_op |<e| op |g>|^2` over `a, a^dag, b, b^dag`. Their gaps above the
/// ground energy are returned as (plus, minus).
pub fn numeric_eigenmodes(h: &Hamiltonian) -> Result<NormalModes> {
    numeric_eigenmodes_with(h, &EigenOptions::default())
}

pub fn numeric_eigenmodes_with(h: &Hamiltonian, opts: &EigenOptions) -> Result<NormalModes> {
    let g = ground_state_with(h, opts)?;
    let probes = [
        raise(h, &g.vector, true),
        raise(h, &g.vector, false),
        lower(h, &g.vector, true),
        lower(h, &g.vector, false),
    ];
    let other = match g.parity {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    };
    let gaps = if h.sector(other).len() <= opts.dense_limit {
        let states = dense_sector(h, other, opts)?;
        let mut weighted: Vec<(f64, f64)> = states
            .iter()
            .map(|e| {
                let w: f64 = probes.iter().map(|p| e.vector.dot(p).powi(2)).sum();
                (w, e.energy - g.energy)
            })
            .collect();
        weighted.sort_by(|a, b| b.0.total_cmp(&a.0));
        [weighted[0].1, weighted[1].1]
    } else {
        // Rayleigh-Ritz in span{a^dag|g>, b^dag|g>}
        let u = probes[0].normalize();
        let mut w = probes[1].clone();
        w.axpy(-u.dot(&w), &u, 1.0);
        let w = w.normalize();
        let hu = h.matvec(&u);
        let hw = h.matvec(&w);
        let m = Matrix2::new(u.dot(&hu), u.dot(&hw), w.dot(&hu), w.dot(&hw));
        let e = m.symmetric_eigenvalues();
        [e[0] - g.energy, e[1] - g.energy]
    };
    Ok(NormalModes {
        plus: gaps[0].max(gaps[1]),
        minus: gaps[0].min(gaps[1]),
    })
}

/// Numeric normal modes at `cutoff`, checked against `cutoff + 10`.
pub fn converged_eigenmodes(c: &ModeCoefficients, cutoff: usize, tolerance: f64) -> Result<NormalModes> {
    let lo = numeric_eigenmodes(&build_hamiltonian(c, TruncatedFockSpace::square(cutoff)?)?)?;
    let hi = numeric_eigenmodes(&build_hamiltonian(c, TruncatedFockSpace::square(cutoff + 10)?)?)?;
    let shift = ((lo.plus - hi.plus) / hi.plus)
        .abs()
        .max(((lo.minus - hi.minus) / hi.minus).abs());
    if shift > tolerance {
        return Err(Error::TruncationNotConverged { shift, tolerance });
    }
    Ok(hi)
}
