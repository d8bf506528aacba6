use serde::{Deserialize, Serialize};

use super::{CircuitParams, Tolerances};
use crate::error::{Error, Result};

/// Junction inductance `L_J0 / (cos(phi) - gamma) + L_0` [H].
///
/// Negative values (for `cos(phi) < gamma`) are legal and are returned as is.
pub fn junction_inductance(phi: f64, params: &CircuitParams) -> Result<f64> {
    junction_inductance_with(phi, params, &Tolerances::default())
}

pub fn junction_inductance_with(phi: f64, params: &CircuitParams, tol: &Tolerances) -> Result<f64> {
    let denom = phi.cos() - params.gamma;
    if denom.abs() < tol.pole {
        return Err(Error::JunctionPole {
            distance: denom.abs(),
            threshold: tol.pole,
        });
    }
    Ok(params.l_j0 / denom + params.l_0)
}

/// Result of reducing the coupler network to resonator-facing elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoupler {
    /// Effective mutual inductance between the resonators [H].
    pub m_star: f64,
    /// Series inductance added to resonator A [H].
    pub l_star_a: f64,
    /// Series inductance added to resonator B [H]; equals `l_star_a` for a symmetric coupler.
    pub l_star_b: f64,
}

impl EffectiveCoupler {
    /// Series inductance of a symmetric coupler.
    pub fn l_star(&self) -> f64 {
        self.l_star_a
    }
}

/// Star-delta reduction of the symmetric coupler: arms `L_sh`, `L_sh`, `L_J`.
///
/// `M_* = L_sh^2 / (2 L_sh + L_J) + M_0`, `L_* = L_sh L_J / (2 L_sh + L_J)`.
pub fn star_delta(l_sh: f64, l_j: f64, m_0: f64) -> Result<EffectiveCoupler> {
    star_delta_general(l_sh, l_sh, l_j, m_0, Tolerances::default().inductance_pole)
}

/// Star-delta reduction with distinct shared arms on the A and B sides.
///
/// The loop formed by `l_left`, `l_right` and `l_j` maps to a star whose
/// common arm `l_left l_right / sum` acts as the mutual inductance and whose
/// outer arms `l_left l_j / sum`, `l_right l_j / sum` load the resonators.
pub fn star_delta_general(
    l_left: f64,
    l_right: f64,
    l_j: f64,
    m_0: f64,
    eps: f64,
) -> Result<EffectiveCoupler> {
    let sum = l_left + l_right + l_j;
    if !(sum.abs() >= eps) {
        return Err(Error::DegenerateNetwork {
            denominator: sum.abs(),
            threshold: eps,
        });
    }
    Ok(EffectiveCoupler {
        m_star: l_left * l_right / sum + m_0,
        l_star_a: l_left * l_j / sum,
        l_star_b: l_right * l_j / sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::NANO;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    fn ideal() -> CircuitParams {
        CircuitParams {
            gamma: 0.0,
            ..CircuitParams::table1()
        }
    }

    #[test]
    fn zero_phase_no_offset() {
        let l = junction_inductance(0.0, &ideal()).unwrap();
        assert!((l - 1.387 * NANO).abs() < 1e-15);
    }

    #[test]
    fn zero_phase_table1() {
        let l = junction_inductance(0.0, &CircuitParams::table1()).unwrap();
        // independent scalar evaluation: 1.210 / 0.947 + 0.177
        let expected = (1.210 / 0.947 + 0.177) * NANO;
        assert!((l - expected).abs() < 1e-18);
        assert!((l / NANO - 1.4548).abs() < 1e-4);
    }

    #[test]
    fn pole_at_quarter_turn() {
        // cos(pi/2) is 6e-17 in floating point, well under the threshold
        let err = junction_inductance(FRAC_PI_2, &ideal()).unwrap_err();
        assert!(matches!(err, Error::JunctionPole { .. }));
    }

    #[test]
    fn negative_branch_is_allowed() {
        let l = junction_inductance(std::f64::consts::PI, &CircuitParams::table1()).unwrap();
        assert!(l < 0.0);
    }

    #[test]
    fn open_junction_limit() {
        let (l_sh, m0) = (0.446 * NANO, 0.381 * NANO);
        let c = star_delta(l_sh, 1e6, m0).unwrap();
        assert!(((c.m_star - m0) / m0).abs() < 1e-6);
        assert!(((c.l_star() - l_sh) / l_sh).abs() < 1e-6);
    }

    #[test]
    fn shorted_junction_limit() {
        let (l_sh, m0) = (0.446 * NANO, 0.381 * NANO);
        let c = star_delta(l_sh, 0.0, m0).unwrap();
        assert!((c.m_star - (l_sh / 2.0 + m0)).abs() < 1e-24);
        assert_eq!(c.l_star(), 0.0);
    }

    #[test]
    fn degenerate_network() {
        let l_sh = 0.4 * NANO;
        assert!(matches!(
            star_delta(l_sh, -2.0 * l_sh, 0.0),
            Err(Error::DegenerateNetwork { .. })
        ));
    }

    #[test]
    fn table1_zero_phase_mutual() {
        let p = CircuitParams::table1();
        let l_j = junction_inductance(0.0, &p).unwrap();
        let c = star_delta(p.l_sh, l_j, p.m_0).unwrap();
        assert!((c.m_star / NANO - 0.4658).abs() < 5e-4);
    }

    /// Two-port impedance check: drive the delta (triangle) network at one
    /// frequency and compare its open-circuit impedance matrix with the star.
    #[test]
    fn star_matches_delta_impedances() {
        let p = CircuitParams::table1();
        let l_j = junction_inductance(0.0, &p).unwrap();
        let c = star_delta(p.l_sh, l_j, 0.0).unwrap();
        let w = 2.0 * std::f64::consts::PI * 6e9;
        let z = |l: f64| Complex64::new(0.0, w * l);
        // Delta: L_sh from node A to ground, L_sh from node B to ground, L_J
        // between A and B. Open-circuit impedances seen from A and B to ground.
        let (za, zb, zj) = (z(p.l_sh), z(p.l_sh), z(l_j));
        let total = za + zb + zj;
        let z11 = za * (zb + zj) / total;
        let z12 = za * zb / total;
        // Star: arms l_star_a, l_star_b to the centre, m_star from centre to ground.
        let s11 = z(c.l_star_a) + z(c.m_star);
        let s12 = z(c.m_star);
        assert!((z11 - s11).norm() < 1e-9 * z11.norm());
        assert!((z12 - s12).norm() < 1e-9 * z12.norm());
    }
}
