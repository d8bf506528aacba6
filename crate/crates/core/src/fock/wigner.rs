use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Boundary magnitude above which the grid is reported as too small.
pub const COVERAGE_THRESHOLD: f64 = 1e-6;

/// Rectangular grid over the quadratures `q`, `p` with `a = q + i p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::square(5.0, 201)
    }
}

impl QuadratureGrid {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self {
            q_min: -half_width,
            q_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            n_q: points,
            n_p: points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_q < 2 || self.n_p < 2 {
            return Err(Error::invalid("grid", "needs at least two points per axis"));
        }
        if !(self.q_max > self.q_min && self.p_max > self.p_min) {
            return Err(Error::invalid("grid", "empty quadrature range"));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn q_values(&self) -> Vec<f64> {
        Self::axis(self.q_min, self.q_max, self.n_q)
    }

    pub fn p_values(&self) -> Vec<f64> {
        Self::axis(self.p_min, self.p_max, self.n_p)
    }
}

/// Wigner function sampled on a grid; `values[(i, j)]` is `W(q_i, p_j)`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub values: DMatrix<f64>,
    /// Largest `|W|` on the grid boundary.
    pub boundary_max: f64,
}

impl WignerGrid {
    pub fn dq(&self) -> f64 {
        self.q[1] - self.q[0]
    }

    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// Riemann sum of `W dq dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.dq() * self.dp()
    }

    /// `int W dp` as a function of `q`.
    pub fn marginal_q(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum() * self.dp()).collect()
    }

    /// `int W dq` as a function of `p`.
    pub fn marginal_p(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum() * self.dq()).collect()
    }

    pub fn is_covered(&self) -> bool {
        self.boundary_max <= COVERAGE_THRESHOLD
    }

    /// Second central moments `(var q, var p)` from the grid.
    pub fn variances(&self) -> (f64, f64) {
        let moments = |axis: &[f64], marginal: Vec<f64>| {
            let norm: f64 = marginal.iter().sum();
            let mean = axis.iter().zip(&marginal).map(|(x, w)| x * w).sum::<f64>() / norm;
            axis.iter()
                .zip(&marginal)
                .map(|(x, w)| (x - mean).powi(2) * w)
                .sum::<f64>()
                / norm
        };
        (moments(&self.q, self.marginal_q()), moments(&self.p, self.marginal_p()))
    }
}

/// Wigner function of a single-mode state with `a = q + i p`.
///
/// With this scaling the vacuum is `(2/pi) exp(-2(q^2 + p^2))` and the
/// function integrates to one over `dq dp`. The number-basis sum over
/// `rho_mn` uses the Laguerre kernels through their three-term recursion in
/// `A = q + i p`, which stays stable at the cutoffs used here.
pub fn wigner(rho: &DensityMatrix, grid: &QuadratureGrid) -> Result<WignerGrid> {
    grid.validate()?;
    if rho.dims.len() != 1 {
        return Err(Error::invalid("rho", "Wigner function needs a single-mode state"));
    }
    let q = grid.q_values();
    let p = grid.p_values();
    let m = rho.dim();
    let sqrt: Vec<f64> = (0..m).map(|n| (n as f64).sqrt()).collect();
    let rows: Vec<Vec<f64>> = q
        .par_iter()
        .map(|&qi| {
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            p.iter()
                .map(|&pj| {
                    let a = Complex64::new(qi, pj);
                    kernel[0] = Complex64::new((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
                    let mut w = rho.entries[(0, 0)].re * kernel[0].re;
                    for n in 1..m {
                        kernel[n] = 2.0 * a * kernel[n - 1] / sqrt[n];
                        w += 2.0 * (rho.entries[(0, n)] * kernel[n]).re;
                    }
                    for i in 1..m {
                        let mut prev = kernel[i];
                        kernel[i] = (2.0 * a.conj() * prev - sqrt[i] * kernel[i - 1]) / sqrt[i];
                        w += rho.entries[(i, i)].re * kernel[i].re;
                        for n in i + 1..m {
                            let next = (2.0 * a * kernel[n - 1] - sqrt[i] * prev) / sqrt[n];
                            prev = kernel[n];
                            kernel[n] = next;
                            w += 2.0 * (rho.entries[(i, n)] * kernel[n]).re;
                        }
                    }
                    2.0 * w
                })
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(q.len(), p.len(), |i, j| rows[i][j]);
    let (nq, np) = (q.len() - 1, p.len() - 1);
    let mut boundary_max = 0.0f64;
    for i in 0..=nq {
        boundary_max = boundary_max.max(values[(i, 0)].abs()).max(values[(i, np)].abs());
    }
    for j in 0..=np {
        boundary_max = boundary_max.max(values[(0, j)].abs()).max(values[(nq, j)].abs());
    }
    if boundary_max > COVERAGE_THRESHOLD {
        log::warn!("Wigner grid does not cover the state: boundary |W| = {boundary_max:.2e}");
    }
    Ok(WignerGrid {
        q,
        p,
        values,
        boundary_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ModeCoefficients;
    use crate::fock::{build_hamiltonian, ground_state, reduced_density, Mode, TruncatedFockSpace};
    use nalgebra::DVector;
    use std::f64::consts::PI;

    /// Number states as functions of `q` with `a = q + i p`:
    /// `psi_n(q) = 2^(1/4) h_n(sqrt 2 q)` for the usual Hermite functions `h_n`.
    fn number_wavefunctions(q: f64, n_max: usize) -> Vec<f64> {
        let x = 2f64.sqrt() * q;
        let mut h = vec![0.0; n_max + 1];
        h[0] = PI.powf(-0.25) * (-x * x / 2.0).exp();
        if n_max > 0 {
            h[1] = 2f64.sqrt() * x * h[0];
        }
        for n in 2..=n_max {
            h[n] = (2.0 / n as f64).sqrt() * x * h[n - 1] - ((n - 1) as f64 / n as f64).sqrt() * h[n - 2];
        }
        h.iter().map(|v| 2f64.powf(0.25) * v).collect()
    }

    #[test]
    fn vacuum_and_one_photon_peaks() {
        let grid = QuadratureGrid::square(4.0, 81);
        let w0 = wigner(&DensityMatrix::fock(0, 4), &grid).unwrap();
        assert!((w0.values[(40, 40)] - 2.0 / PI).abs() < 1e-12);
        // isotropic Gaussian
        assert!((w0.values[(50, 40)] - w0.values[(40, 50)]).abs() < 1e-14);
        assert!((w0.values[(50, 40)] - 2.0 / PI * (-2.0f64).exp()).abs() < 1e-12);
        let w1 = wigner(&DensityMatrix::fock(1, 4), &grid).unwrap();
        assert!((w1.values[(40, 40)] + 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn number_states_are_normalized() {
        let grid = QuadratureGrid::default();
        for n in 0..6 {
            let w = wigner(&DensityMatrix::fock(n, 8), &grid).unwrap();
            assert!((w.integral() - 1.0).abs() < 1e-3, "n={n}: {}", w.integral());
            assert!(w.is_covered());
        }
    }

    #[test]
    fn sign_convention_follows_annihilation_operator() {
        // (|0> + i|1>)/sqrt 2 has <a> = i/2, so <p> = +1/2
        let psi = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
            .unscale(2f64.sqrt());
        let rho = DensityMatrix::from_pure(&psi, vec![2]);
        let w = wigner(&rho, &QuadratureGrid::default()).unwrap();
        let mp = w.marginal_p();
        let mean_p: f64 = w.p.iter().zip(&mp).map(|(p, m)| p * m).sum::<f64>() * w.dp();
        let mq = w.marginal_q();
        let mean_q: f64 = w.q.iter().zip(&mq).map(|(q, m)| q * m).sum::<f64>() * w.dq();
        assert!((mean_p - 0.5).abs() < 1e-6, "{mean_p}");
        assert!(mean_q.abs() < 1e-6);
    }

    #[test]
    fn marginals_match_wavefunction_densities() {
        let coeffs = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.3, -0.4),
            Complex64::new(0.0, 0.5),
            Complex64::new(-0.2, 0.1),
            Complex64::new(0.3, 0.2),
        ];
        let psi = DVector::from_row_slice(&coeffs).normalize();
        let rho = DensityMatrix::from_pure(&psi, vec![5]);
        let w = wigner(&rho, &QuadratureGrid::default()).unwrap();
        let mq = w.marginal_q();
        for (i, &q) in w.q.iter().enumerate() {
            let h = number_wavefunctions(q, 4);
            let amp: Complex64 = (0..5).map(|n| psi[n] * h[n]).sum();
            assert!((mq[i] - amp.norm_sqr()).abs() < 1e-3, "q={q}");
        }
        // <p|n> = (-i)^n psi_n(p)
        let mp = w.marginal_p();
        for (j, &p) in w.p.iter().enumerate() {
            let h = number_wavefunctions(p, 4);
            let amp: Complex64 = (0..5)
                .map(|n| psi[n] * Complex64::new(0.0, -1.0).powu(n as u32) * h[n])
                .sum();
            assert!((mp[j] - amp.norm_sqr()).abs() < 1e-3, "p={p}");
        }
    }

    #[test]
    fn narrow_grid_is_flagged() {
        let w = wigner(&DensityMatrix::fock(3, 5), &QuadratureGrid::square(1.5, 31)).unwrap();
        assert!(!w.is_covered());
    }

    #[test]
    fn strong_coupling_ground_state_is_squeezed() {
        let ratio = 0.48;
        let c = ModeCoefficients::degenerate(1.0, ratio);
        let h = build_hamiltonian(&c, TruncatedFockSpace::for_ratio(ratio).unwrap()).unwrap();
        let rho = reduced_density(&ground_state(&h).unwrap().density(), Mode::A);
        let w = wigner(&rho, &QuadratureGrid::default()).unwrap();
        assert!((w.integral() - 1.0).abs() < 1e-3);
        let (vq, vp) = w.variances();
        // normal modes (a +- b)/sqrt 2 have <x^2> = s/2, <p^2> = 1/(2 s), s = sqrt(1 +- 2 ratio)
        let s = [(1.0 + 2.0 * ratio).sqrt(), (1.0 - 2.0 * ratio).sqrt()];
        let xx = 0.25 * (s[0] + s[1]);
        let pp = 0.25 * (1.0 / s[0] + 1.0 / s[1]);
        let oracle = xx / pp;
        assert!(((vq / vp) / oracle - 1.0).abs() < 0.02, "{} vs {oracle}", vq / vp);
    }
}
