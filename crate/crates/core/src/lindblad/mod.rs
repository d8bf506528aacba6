//! Driven, damped steady-state response of the coupled resonators.
//!
//! Moments are expressed in the frame rotating at the probe frequency. The
//! drive enters through port A or B and leaks into the other resonator with
//! crosstalk fraction `eta`.

mod oracle;
mod scan;

pub use oracle::lindblad_steady_state_oracle;
pub use scan::{
    coupling_window, find_disappearance, scan_coefficients, scan_spectrum, zero_coupling_bias, Branch,
    Disappearance, DisappearanceOptions, SpectrumGrid,
};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::ModeCoefficients;
use crate::error::{Error, Result};
use crate::fock::Coupling;

/// Input/output port; port A couples mainly to resonator A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    A,
    B,
}

impl Port {
    pub fn other(self) -> Port {
        match self {
            Port::A => Port::B,
            Port::B => Port::A,
        }
    }

    /// Weights of resonators (a, b) at this port.
    pub fn weights(self, eta: f64) -> (f64, f64) {
        match self {
            Port::A => (1.0 - eta, eta),
            Port::B => (eta, 1.0 - eta),
        }
    }
}

/// Measured coefficient, named output-then-input (`TBA` is A to B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signal {
    #[serde(rename = "t_BA")]
    TBA,
    #[serde(rename = "t_AB")]
    TAB,
    #[serde(rename = "r_AA")]
    RAA,
    #[serde(rename = "r_BB")]
    RBB,
}

impl Signal {
    pub fn input(self) -> Port {
        match self {
            Signal::TBA | Signal::RAA => Port::A,
            Signal::TAB | Signal::RBB => Port::B,
        }
    }

    pub fn output(self) -> Port {
        match self {
            Signal::TBA | Signal::RBB => Port::B,
            Signal::TAB | Signal::RAA => Port::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Signal::TBA => "t_BA",
            Signal::TAB => "t_AB",
            Signal::RAA => "r_AA",
            Signal::RBB => "r_BB",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t_ba" | "tba" => Ok(Signal::TBA),
            "t_ab" | "tab" => Ok(Signal::TAB),
            "r_aa" | "raa" => Ok(Signal::RAA),
            "r_bb" | "rbb" => Ok(Signal::RBB),
            _ => Err(Error::invalid("signal", format!("unknown signal `{s}`"))),
        }
    }
}

/// Probe drive. Rates and frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Drive rate `xi sqrt(kappa)` of the input port.
    pub epsilon: f64,
    pub eta: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub omega_p: f64,
    pub input_port: Port,
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_a >= 0.0 && self.kappa_b >= 0.0) {
            return Err(Error::invalid("kappa", "decay rates must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid("eta", "crosstalk fraction must lie in [0, 1]"));
        }
        if !self.epsilon.is_finite() || !self.omega_p.is_finite() {
            return Err(Error::invalid("drive", "drive rate and probe frequency must be finite"));
        }
        Ok(())
    }

    fn input_kappa(&self) -> f64 {
        match self.input_port {
            Port::A => self.kappa_a,
            Port::B => self.kappa_b,
        }
    }

    /// Drive amplitude `xi = epsilon / sqrt(kappa)` of the input port.
    pub fn xi(&self) -> f64 {
        self.epsilon / self.input_kappa().sqrt()
    }

    /// Drive terms `(epsilon_a, epsilon_b)` on the two resonators.
    pub fn drive_terms(&self) -> (f64, f64) {
        let xi = self.xi();
        let (wa, wb) = self.input_port.weights(self.eta);
        (wa * xi * self.kappa_a.sqrt(), wb * xi * self.kappa_b.sqrt())
    }

    pub fn with_probe(self, omega_p: f64) -> Self {
        Self { omega_p, ..self }
    }
}

/// Steady-state `<a>`, `<b>` in the probe frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseAmplitudes {
    pub a: Complex64,
    pub b: Complex64,
}

/// First moments with the rotating-wave coupling `g (a^dag b + a b^dag)`.
pub fn steady_state_moments(c: &ModeCoefficients, d: &DriveConfig) -> Result<ResponseAmplitudes> {
    steady_state_moments_with(c, d, Coupling::Rwa)
}

/// First moments for either coupling form.
///
/// The full coupling `-g (a^dag - a)(b^dag - b)` mixes `<a>` with `<b>^*`, so
/// the response also carries components at `-omega_p`; the returned moments
/// are the co-rotating parts.
pub fn steady_state_moments_with(
    c: &ModeCoefficients,
    d: &DriveConfig,
    coupling: Coupling,
) -> Result<ResponseAmplitudes> {
    d.validate()?;
    let i = Complex64::i();
    let ig = i * c.g_r;
    let (ea, eb) = d.drive_terms();
    let da = i * (c.omega_a - d.omega_p) + d.kappa_a / 2.0;
    let db = i * (c.omega_b - d.omega_p) + d.kappa_b / 2.0;
    match coupling {
        Coupling::Rwa => {
            let m = Matrix2::new(da, ig, ig, db);
            let x = m
                .lu()
                .solve(&Vector2::new(ea.into(), eb.into()))
                .filter(|x| x.iter().all(|z| z.is_finite()))
                .ok_or(Error::Singular("resonant undamped drive"))?;
            Ok(ResponseAmplitudes { a: x[0], b: x[1] })
        }
        Coupling::Full => {
            // unknowns (A+, B+, A-^*, B-^*)
            let da_m = -i * (c.omega_a + d.omega_p) + d.kappa_a / 2.0;
            let db_m = -i * (c.omega_b + d.omega_p) + d.kappa_b / 2.0;
            let z = Complex64::new(0.0, 0.0);
            #[rustfmt::skip]
            let m = Matrix4::new(
                da, ig, z, -ig,
                ig, db, -ig, z,
                z, ig, da_m, -ig,
                ig, z, -ig, db_m,
            );
            let x = m
                .lu()
                .solve(&Vector4::new(ea.into(), eb.into(), z, z))
                .filter(|x| x.iter().all(|z| z.is_finite()))
                .ok_or(Error::Singular("resonant undamped drive"))?;
            Ok(ResponseAmplitudes { a: x[0], b: x[1] })
        }
    }
}

/// Signed port coefficients for one drive, before taking magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortSignals {
    /// Output at the port opposite the input.
    pub transmission: f64,
    /// Output at the input port.
    pub reflection: f64,
}

/// Contributions `(from a, from b)` of the two resonators at `output`.
pub fn port_terms(r: &ResponseAmplitudes, d: &DriveConfig, output: Port) -> (f64, f64) {
    let xi = d.xi();
    let (wa, wb) = output.weights(d.eta);
    (
        -(d.kappa_a / (2.0 * xi)) * wa * r.a.im,
        -(d.kappa_b / (2.0 * xi)) * wb * r.b.im,
    )
}

pub fn port_signal(r: &ResponseAmplitudes, d: &DriveConfig, output: Port) -> f64 {
    let (ta, tb) = port_terms(r, d, output);
    ta + tb
}

pub fn transmission_reflection(r: &ResponseAmplitudes, d: &DriveConfig) -> PortSignals {
    PortSignals {
        transmission: port_signal(r, d, d.input_port.other()),
        reflection: port_signal(r, d, d.input_port),
    }
}

/// `|signal|` at one probe frequency.
pub fn signal_magnitude(
    c: &ModeCoefficients,
    d: &DriveConfig,
    signal: Signal,
    coupling: Coupling,
) -> Result<f64> {
    let d = DriveConfig {
        input_port: signal.input(),
        ..*d
    };
    let r = steady_state_moments_with(c, &d, coupling)?;
    Ok(port_signal(&r, &d, signal.output()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn drive(eta: f64, omega_p: f64) -> DriveConfig {
        DriveConfig {
            epsilon: 0.02,
            eta,
            kappa_a: 0.01,
            kappa_b: 0.01,
            omega_p,
            input_port: Port::A,
        }
    }

    #[test]
    fn single_resonant_mode() {
        let c = ModeCoefficients::new(1.0, 1.2, 0.0);
        let d = drive(0.0, 1.0);
        let r = steady_state_moments(&c, &d).unwrap();
        assert_eq!(r.b, Complex64::new(0.0, 0.0));
        let expect = 2.0 * d.xi() / d.kappa_a.sqrt();
        assert!((r.a.re - expect).abs() < 1e-12 * expect && r.a.im.abs() < 1e-12 * expect);
    }

    #[test]
    fn moments_are_linear_in_drive_and_signals_are_not() {
        let c = ModeCoefficients::new(1.0, 1.05, 0.02);
        let d = drive(0.25, 1.01);
        let d10 = DriveConfig { epsilon: 10.0 * d.epsilon, ..d };
        let r = steady_state_moments(&c, &d).unwrap();
        let r10 = steady_state_moments(&c, &d10).unwrap();
        assert!((r10.a - r.a * 10.0).norm() < 1e-12 * r10.a.norm());
        assert!((r10.b - r.b * 10.0).norm() < 1e-12 * r10.b.norm());
        let s = transmission_reflection(&r, &d);
        let s10 = transmission_reflection(&r10, &d10);
        assert!((s.transmission - s10.transmission).abs() < 1e-12 * s.transmission.abs());
        assert!((s.reflection - s10.reflection).abs() < 1e-12 * s.reflection.abs());
    }

    #[test]
    fn no_path_without_coupling_or_crosstalk() {
        let c = ModeCoefficients::new(1.0, 1.05, 0.0);
        for wp in [0.9, 1.0, 1.02, 1.05, 1.1] {
            let d = drive(0.0, wp);
            let r = steady_state_moments(&c, &d).unwrap();
            assert_eq!(transmission_reflection(&r, &d).transmission, 0.0);
        }
    }

    #[test]
    fn symmetric_mixing_equalizes_ports() {
        let c = ModeCoefficients::new(1.0, 1.0, 0.0);
        for wp in [0.98, 0.999, 1.003] {
            let d = drive(0.5, wp);
            let s = transmission_reflection(&steady_state_moments(&c, &d).unwrap(), &d);
            assert!((s.transmission.abs() - s.reflection.abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn dispersive_lineshape_width() {
        let c = ModeCoefficients::new(1.0, 1.3, 0.0);
        let kappa = 0.01;
        let n = 20001;
        let probe: Vec<f64> = (0..n).map(|k| 0.95 + 0.1 * k as f64 / (n - 1) as f64).collect();
        let im: Vec<f64> = probe
            .iter()
            .map(|&wp| steady_state_moments(&c, &drive(0.0, wp)).unwrap().a.im)
            .collect();
        let (kmax, _) = im.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let (kmin, _) = im.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let sep = (probe[kmax] - probe[kmin]).abs();
        assert!((sep - kappa).abs() < 2e-5, "{sep}");
    }

    #[test]
    fn full_coupling_reduces_to_rwa_for_weak_coupling() {
        let c = ModeCoefficients::new(1.0, 1.02, 1e-4);
        let d = drive(0.1, 1.001);
        let rwa = steady_state_moments(&c, &d).unwrap();
        let full = steady_state_moments_with(&c, &d, Coupling::Full).unwrap();
        assert!((rwa.a - full.a).norm() < 1e-3 * rwa.a.norm());
        let c0 = ModeCoefficients::new(1.0, 1.02, 0.0);
        let rwa0 = steady_state_moments(&c0, &d).unwrap();
        let full0 = steady_state_moments_with(&c0, &d, Coupling::Full).unwrap();
        assert!((rwa0.a - full0.a).norm() < 1e-14 && (rwa0.b - full0.b).norm() < 1e-14);
    }

    #[test]
    fn undamped_resonance_is_singular() {
        let c = ModeCoefficients::new(1.0, 1.2, 0.0);
        let d = DriveConfig {
            kappa_a: 0.0,
            kappa_b: 0.0,
            epsilon: 0.0,
            ..drive(0.0, 1.0)
        };
        assert!(steady_state_moments(&c, &d).is_err());
    }

    #[test]
    fn rejects_bad_drive() {
        let c = ModeCoefficients::new(1.0, 1.2, 0.0);
        assert!(steady_state_moments(&c, &drive(1.5, 1.0)).is_err());
        assert!(steady_state_moments(&c, &DriveConfig { kappa_a: -1.0, ..drive(0.0, 1.0) }).is_err());
    }

    #[test]
    fn signal_names_round_trip() {
        for s in [Signal::TBA, Signal::TAB, Signal::RAA, Signal::RBB] {
            assert_eq!(Signal::parse(s.label()).unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.label()));
        }
        assert_eq!(Signal::TBA.input(), Port::A);
        assert_eq!(Signal::TBA.output(), Port::B);
    }

    proptest! {
        #[test]
        fn reciprocity(
            da in -0.05f64..0.05, g in -0.03f64..0.03, eta in 0.0f64..0.5,
            wp in 0.9f64..1.1, kappa in 1e-3f64..0.05,
        ) {
            let c = ModeCoefficients::new(1.0, 1.0 + da, g);
            let d = DriveConfig { kappa_a: kappa, kappa_b: kappa, ..drive(eta, wp) };
            let t_ba = signal_magnitude(&c, &d, Signal::TBA, Coupling::Rwa).unwrap();
            let t_ab = signal_magnitude(&c, &d, Signal::TAB, Coupling::Rwa).unwrap();
            prop_assert!((t_ba - t_ab).abs() <= 1e-9 * t_ba.max(t_ab).max(1e-12));
        }

        #[test]
        fn port_mirror_symmetry(
            da in -0.05f64..0.05, g in -0.03f64..0.03, eta in 0.0f64..1.0, wp in 0.9f64..1.1,
        ) {
            let c = ModeCoefficients::new(1.0, 1.0 + da, g);
            let d = drive(eta, wp);
            let r_aa = signal_magnitude(&c, &d, Signal::RAA, Coupling::Rwa).unwrap();
            let r_bb = signal_magnitude(&c.swapped(), &d, Signal::RBB, Coupling::Rwa).unwrap();
            prop_assert!((r_aa - r_bb).abs() <= 1e-9 * r_aa.max(1e-12));
        }
    }
}
