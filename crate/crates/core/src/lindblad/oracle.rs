use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DriveConfig, ResponseAmplitudes};
use crate::circuit::ModeCoefficients;
use crate::error::{Error, Result};
use crate::fock::TruncatedFockSpace;

/// Largest population tolerated on the last kept level of either mode.
const EDGE_POPULATION_LIMIT: f64 = 1e-6;

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// Steady state of the full master equation in a truncated basis.
///
/// Builds the Liouvillian of the rotating-wave Hamiltonian with coherent
/// drive and port decay, replaces one equation by the trace condition and
/// solves for the stationary density matrix. Only sensible for weak drives;
/// linearity of the moments lets callers rescale.
pub fn lindblad_steady_state_oracle(
    c: &ModeCoefficients,
    d: &DriveConfig,
    space: TruncatedFockSpace,
) -> Result<ResponseAmplitudes> {
    d.validate()?;
    let n = space.dim();
    if n * n > 4096 {
        return Err(Error::DimensionCap { dim: n * n, cap: 4096 });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut a = DMatrix::from_element(n, n, zero);
    let mut b = DMatrix::from_element(n, n, zero);
    for i in 0..n {
        let (na, nb) = space.levels(i);
        if na > 0 {
            a[(space.index(na - 1, nb), i)] = Complex64::new((na as f64).sqrt(), 0.0);
        }
        if nb > 0 {
            b[(space.index(na, nb - 1), i)] = Complex64::new((nb as f64).sqrt(), 0.0);
        }
    }
    let ad = a.adjoint();
    let bd = b.adjoint();
    let (ea, eb) = d.drive_terms();
    let i = Complex64::i();
    let h = &ad * &a * Complex64::from(c.omega_a - d.omega_p)
        + &bd * &b * Complex64::from(c.omega_b - d.omega_p)
        + (&ad * &b + &a * &bd) * Complex64::from(c.g_r)
        + (&ad * Complex64::from(ea) - &a * Complex64::from(ea)) * i
        + (&bd * Complex64::from(eb) - &b * Complex64::from(eb)) * i;
    let id = DMatrix::<Complex64>::identity(n, n);
    // column-stacked vec: vec(X rho Y) = (Y^T kron X) vec(rho)
    let mut l = (kron(&id, &h) - kron(&h.transpose(), &id)) * (-i);
    for (op, kappa) in [(&a, d.kappa_a), (&b, d.kappa_b)] {
        let od = op.adjoint();
        let nn = &od * op;
        let k = Complex64::from(kappa);
        l += (kron(&op.conjugate(), op) - (kron(&id, &nn) + kron(&nn.transpose(), &id)) * Complex64::from(0.5)) * k;
    }
    let mut rhs = DVector::from_element(n * n, zero);
    for col in 0..n * n {
        l[(0, col)] = zero;
    }
    for k in 0..n {
        l[(0, k * n + k)] = Complex64::new(1.0, 0.0);
    }
    rhs[0] = Complex64::new(1.0, 0.0);
    let v = l
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Liouvillian steady state"))?;
    let rho = DMatrix::from_fn(n, n, |r, s| v[s * n + r]);
    let residual = (&rho - rho.adjoint()).map(|z| z.norm()).max();
    if !residual.is_finite() || residual > 1e-8 {
        return Err(Error::NonConvergence {
            what: "Liouvillian steady state",
            iterations: 1,
            residual,
        });
    }
    let mut edge = 0.0f64;
    for k in 0..n {
        let (na, nb) = space.levels(k);
        if na == space.n_a_max || nb == space.n_b_max {
            edge = edge.max(rho[(k, k)].re);
        }
    }
    if edge > EDGE_POPULATION_LIMIT {
        return Err(Error::TruncationOverflow {
            population: edge,
            threshold: EDGE_POPULATION_LIMIT,
        });
    }
    Ok(ResponseAmplitudes {
        a: (&rho * &a).trace(),
        b: (&rho * &b).trace(),
    })
}
