//! Ground-state observables checked against the exact Gaussian solution.

use coupler_core::fock::{
    build_hamiltonian, ground_state, mean_photon, reduced_density, von_neumann_entropy, GroundStateSummary, Mode,
    TruncatedFockSpace,
};
use coupler_core::ModeCoefficients;

/// Quadrature variances of mode a for omega_a = omega_b and ratio r = g/omega.
/// The coupling only touches the p quadratures, so the two normal modes are
/// (a +- b)/sqrt(2) with p stiffness 1 +- 2r.
fn gaussian_variances(r: f64) -> (f64, f64) {
    let (sp, sm) = ((1.0 + 2.0 * r).sqrt(), (1.0 - 2.0 * r).sqrt());
    ((sp + sm) / 4.0, (1.0 / sp + 1.0 / sm) / 4.0)
}

fn gaussian_photon(r: f64) -> f64 {
    let (xx, pp) = gaussian_variances(r);
    (xx + pp - 1.0) / 2.0
}

fn gaussian_entropy_bits(r: f64) -> f64 {
    let (xx, pp) = gaussian_variances(r);
    let nu = (xx * pp).sqrt();
    let (u, v) = (nu + 0.5, nu - 0.5);
    let term = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    term(u) - term(v)
}

fn summary(ratio: f64, cutoff: usize) -> (f64, f64, GroundStateSummary) {
    let c = ModeCoefficients::degenerate(1.0, ratio);
    let h = build_hamiltonian(&c, TruncatedFockSpace::square(cutoff).unwrap()).unwrap();
    let g = ground_state(&h).unwrap();
    let rho_a = reduced_density(&g.density(), Mode::A);
    (mean_photon(&rho_a), von_neumann_entropy(&rho_a), GroundStateSummary::from_state(&g))
}

#[test]
fn photon_number_matches_gaussian_oracle_deep_ultrastrong() {
    let (n_a, s_a, s) = summary(0.48, 50);
    let exact = gaussian_photon(0.48);
    assert!((n_a - exact).abs() < 1e-3, "n_a {n_a} vs {exact}");
    assert!((s.n_b - exact).abs() < 1e-3);
    let s_exact = gaussian_entropy_bits(0.48);
    assert!((s_a - s_exact).abs() < 1e-2, "S_a {s_a} vs {s_exact}");
    assert!(s.edge_population < 1e-4, "edge {}", s.edge_population);
}

#[test]
fn moderate_coupling_matches_oracle_tightly() {
    for ratio in [0.05, 0.1, 0.2, 0.3] {
        let (n_a, s_a, _) = summary(ratio, 30);
        assert!((n_a - gaussian_photon(ratio)).abs() < 1e-8, "ratio {ratio}: {n_a}");
        assert!((s_a - gaussian_entropy_bits(ratio)).abs() < 1e-6, "ratio {ratio}: {s_a}");
    }
}

#[test]
fn truncation_converges_from_30_to_40() {
    for ratio in [0.2, 0.4] {
        let (n30, s30, _) = summary(ratio, 30);
        let (n40, s40, _) = summary(ratio, 40);
        assert!((n30 - n40).abs() < 1e-6, "ratio {ratio}: {n30} vs {n40}");
        assert!((s30 - s40).abs() < 1e-5, "ratio {ratio}: {s30} vs {s40}");
    }
}

#[test]
fn ground_state_has_even_parity() {
    let (_, _, s) = summary(0.3, 20);
    assert!(s.odd_parity < 1e-12);
    assert!((s.purity_a - 1.0).abs() > 1e-3);
}
