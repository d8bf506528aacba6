//! Coupler variant with junctions in place of the shared inductors.
//!
//! Three junctions (alpha, L, R) in series close the coupler loop. The shared
//! arms become `L_Js{L,R} / cos(phi_{L,R}) + L_0{L,R}` and the central
//! junction `L_Jalpha / cos(phi_alpha) + L_0`; all three phases minimize
//!
//! `U = (phi_alpha + phi_L + phi_R - phi_ex)^2 / (2 Lambda) - sum_j cos(phi_j) / L_j`
//!
//! with `Lambda = L_0L + L_0R + L_0`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{coefficients_from_network, star_delta_general, NetworkRecord, Tolerances};
use crate::error::{Error, Result};
use crate::units::{wrap_phase, FEMTO, NANO, PICO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeJunctionParams {
    pub c_a: f64,
    pub c_b: f64,
    pub l_a: f64,
    pub l_b: f64,
    pub m_0: f64,
    pub l_0: f64,
    pub l_0l: f64,
    pub l_0r: f64,
    pub l_js_l: f64,
    pub l_js_r: f64,
    pub l_j_alpha: f64,
}

impl ThreeJunctionParams {
    /// Fitted parameters of the measured three-junction device.
    pub fn fig3() -> Self {
        Self {
            c_a: 485.0 * FEMTO,
            c_b: 489.0 * FEMTO,
            l_a: 1.30 * NANO,
            l_b: 1.30 * NANO,
            m_0: 34.5 * PICO,
            l_0: 137.0 * PICO,
            l_0l: 33.3 * PICO,
            l_0r: 33.3 * PICO,
            l_js_l: 562.0 * PICO,
            l_js_r: 562.0 * PICO,
            l_j_alpha: 2.50 * NANO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("C_a", self.c_a),
            ("C_b", self.c_b),
            ("L_a", self.l_a),
            ("L_b", self.l_b),
            ("M_0", self.m_0),
            ("L_0", self.l_0),
            ("L_0L", self.l_0l),
            ("L_0R", self.l_0r),
            ("L_JsL", self.l_js_l),
            ("L_JsR", self.l_js_r),
            ("L_Jalpha", self.l_j_alpha),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::error::Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn loop_inductance(&self) -> f64 {
        self.l_0l + self.l_0r + self.l_0
    }

    /// Junction inductance scales in (alpha, L, R) order.
    pub fn junctions(&self) -> [f64; 3] {
        [self.l_j_alpha, self.l_js_l, self.l_js_r]
    }
}

pub fn three_junction_potential(phases: [f64; 3], phi_ex: f64, p: &ThreeJunctionParams) -> f64 {
    let s: f64 = phases.iter().sum::<f64>() - phi_ex;
    let l = p.junctions();
    0.5 * s * s / p.loop_inductance() - (0..3).map(|j| phases[j].cos() / l[j]).sum::<f64>()
}

pub fn three_junction_gradient(phases: [f64; 3], phi_ex: f64, p: &ThreeJunctionParams) -> [f64; 3] {
    let s: f64 = phases.iter().sum::<f64>() - phi_ex;
    let l = p.junctions();
    let common = s / p.loop_inductance();
    [0, 1, 2].map(|j| common + phases[j].sin() / l[j])
}

fn hessian(phases: [f64; 3], p: &ThreeJunctionParams) -> Matrix3<f64> {
    let l = p.junctions();
    let c = 1.0 / p.loop_inductance();
    let mut h = Matrix3::from_element(c);
    for j in 0..3 {
        h[(j, j)] += phases[j].cos() / l[j];
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeJunctionMinimum {
    /// Junction phases (alpha, L, R) [rad].
    pub phases: [f64; 3],
    pub energy: f64,
    pub gradient_norm: f64,
    /// Smallest Hessian eigenvalue at the solution [1/H].
    pub min_curvature: f64,
    /// Number of distinct local minima found.
    pub minima: usize,
}

/// Joint ground-state phases of the three-junction loop.
///
/// Stationary points share one loop current `I`: `sin(phi_j) = I L_j` and
/// `sum_j phi_j - phi_ex = -Lambda I`. Each phase sits on the principal or the
/// flipped arcsine branch; at most one junction can be flipped at a minimum.
/// The loop current is root-bracketed on a grid for every branch pattern and
/// winding number, candidates are filtered by Hessian positivity, and the
/// lowest one is polished by Newton steps.
pub fn minimize_3j_potential(phi_ex: f64, p: &ThreeJunctionParams) -> Result<ThreeJunctionMinimum> {
    p.validate()?;
    if !phi_ex.is_finite() {
        return Err(Error::invalid("phi_ex", "must be finite"));
    }
    let tol = Tolerances::default();
    let wrapped = wrap_phase(phi_ex);
    let shift = phi_ex - wrapped;
    let l = p.junctions();
    let lambda = p.loop_inductance();
    let i_max = l.iter().map(|x| 1.0 / x).fold(f64::INFINITY, f64::min);

    let phases_at = |current: f64, flipped: Option<usize>| -> [f64; 3] {
        [0, 1, 2].map(|j| {
            let a = (current * l[j]).clamp(-1.0, 1.0).asin();
            if flipped == Some(j) {
                PI - a
            } else {
                a
            }
        })
    };
    // F(I) without the winding term 2 pi N.
    let residual = |current: f64, flipped: Option<usize>| -> f64 {
        phases_at(current, flipped).iter().sum::<f64>() - wrapped + lambda * current
    };

    const SAMPLES: usize = 256;
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    for flipped in [None, Some(0), Some(1), Some(2)] {
        let grid: Vec<(f64, f64)> = (0..=SAMPLES)
            .map(|k| {
                let current = -i_max + 2.0 * i_max * k as f64 / SAMPLES as f64;
                (current, residual(current, flipped))
            })
            .collect();
        for winding in -3i32..=3 {
            let offset = TAU * winding as f64;
            for w in grid.windows(2) {
                let (x0, f0) = (w[0].0, w[0].1 + offset);
                let (x1, f1) = (w[1].0, w[1].1 + offset);
                if f0 == 0.0 || f0.signum() != f1.signum() {
                    let root = bisect(|x| residual(x, flipped) + offset, x0, x1, f0);
                    let mut ph = phases_at(root, flipped);
                    ph[0] += offset; // winding carried by the alpha junction
                    candidates.push(ph);
                }
            }
        }
    }

    let mut minima: Vec<([f64; 3], f64)> = Vec::new();
    for ph in candidates {
        let eig = hessian(ph, p).symmetric_eigenvalues().min();
        if eig < -1e-6 / lambda {
            continue;
        }
        let dup = minima.iter().any(|(m, _)| {
            (0..3).all(|j| (wrap_phase(m[j] - ph[j])).abs() < 1e-7)
                && ((m.iter().sum::<f64>() - ph.iter().sum::<f64>()).abs() < 1e-7)
        });
        if !dup {
            minima.push((ph, three_junction_potential(ph, wrapped, p)));
        }
    }
    let Some(&(mut best, _)) = minima.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        return Err(Error::NonConvergence {
            what: "three-junction minimizer",
            iterations: SAMPLES,
            residual: f64::NAN,
        });
    };
    if minima.len() > 1 {
        log::warn!(
            "three-junction potential is multistable at phi_ex = {phi_ex}: {} minima",
            minima.len()
        );
    }

    for _ in 0..tol.max_iterations {
        let g = Vector3::from(three_junction_gradient(best, wrapped, p));
        let Some(step) = hessian(best, p).cholesky().map(|c| c.solve(&(-g))) else {
            break;
        };
        for j in 0..3 {
            best[j] += step[j];
        }
        if step.amax() < tol.phase {
            break;
        }
    }
    let g = three_junction_gradient(best, wrapped, p);
    let gradient_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let min_curvature = hessian(best, p).symmetric_eigenvalues().min();
    best[0] += shift;
    Ok(ThreeJunctionMinimum {
        phases: best,
        energy: three_junction_potential(best, phi_ex, p),
        gradient_norm,
        min_curvature,
        minima: minima.len(),
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Hamiltonian coefficients of the three-junction coupler at one flux bias.
pub fn three_junction_coefficients(
    p: &ThreeJunctionParams,
    phi_ex: f64,
) -> Result<(ThreeJunctionMinimum, NetworkRecord)> {
    let tol = Tolerances::default();
    let min = minimize_3j_potential(phi_ex, p)?;
    let [alpha, left, right] = min.phases;
    let arm = |l_j: f64, phi: f64, l_geo: f64| -> Result<f64> {
        let c = phi.cos();
        if c.abs() < tol.pole {
            return Err(Error::JunctionPole {
                distance: c.abs(),
                threshold: tol.pole,
            });
        }
        Ok(l_j / c + l_geo)
    };
    let l_left = arm(p.l_js_l, left, p.l_0l)?;
    let l_right = arm(p.l_js_r, right, p.l_0r)?;
    let l_center = arm(p.l_j_alpha, alpha, p.l_0)?;
    let coupler = star_delta_general(l_left, l_right, l_center, p.m_0, tol.inductance_pole)?;
    let network = coefficients_from_network(p.l_a, p.l_b, p.c_a, p.c_b, coupler)?;
    Ok((min, network))
}
