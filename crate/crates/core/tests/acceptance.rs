//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use coupler_core::circuit::{
    coefficients_from_network, infinite_mutual_limits, record_sweep, star_delta, three_junction_coefficients,
    EffectiveCoupler, ThreeJunctionParams,
};
use coupler_core::fit::{branch_rms, fit_parameters, g_range, rwa_shift, synthetic_peaks, FitConfig, Peak, PeakSet, DEFAULT_BAND_HZ};
use coupler_core::fock::{
    build_hamiltonian, ground_state, mean_photon, numeric_eigenmodes, reduced_density, von_neumann_entropy, Mode,
    TruncatedFockSpace,
};
use coupler_core::lindblad::{
    find_disappearance, lindblad_steady_state_oracle, scan_spectrum, steady_state_moments, zero_coupling_bias,
    DisappearanceOptions, DriveConfig, Port, Signal, SpectrumGrid,
};
use coupler_core::units::{from_ghz, from_mhz, hertz, mhz, turns_to_rad, NANO};
use coupler_core::{eigenmodes, mode_coefficients, rwa_modes, CircuitParams, FluxBias, ModeCoefficients};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(name: &str, value: f64, target: f64, tol: f64) -> Result<(), String> {
    if (value - target).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name} = {value:.6} outside {target} +- {tol}"))
    }
}

fn rel_within(name: &str, value: f64, target: f64, rel: f64) -> Result<(), String> {
    within(name, value, target, rel * target.abs())
}

fn in_time(name: &str, elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("{name} took {elapsed:?}, limit {limit:?}"))
    }
}

/// 1. Coupling range of the single-junction device.
fn coupling_range() -> Outcome {
    let p = CircuitParams::table1();
    let biases: Vec<FluxBias> = (0..2000).map(|k| FluxBias::from_turns(k as f64 / 2000.0)).collect();
    let start = Instant::now();
    let sweep = record_sweep(&p, &biases);
    let elapsed = start.elapsed();
    let g: Vec<f64> = sweep
        .into_iter()
        .map(|r| r.map(|r| r.network.coefficients.g_r))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let range = g_range(&p, 2000).map_err(|e| e.to_string())?;
    let (lo, hi) = (mhz(range.g_min), mhz(range.g_max));
    let sweep_lo = mhz(g.iter().cloned().fold(f64::INFINITY, f64::min));
    rel_within("g_min [MHz]", lo, -1086.0, 0.05)?;
    rel_within("g_max [MHz]", hi, 604.0, 0.05)?;
    within("refinement gain [MHz]", sweep_lo - lo, 0.0, 1.0)?;
    in_time("2000-point sweep", elapsed, Duration::from_secs(1))?;
    Ok(format!("g range ({lo:.1}, {hi:.1}) MHz, sweep {elapsed:.2?}"))
}

/// 2. Coupling ratio at half a flux quantum.
fn ultrastrong_ratio() -> Outcome {
    let c = mode_coefficients(&CircuitParams::table1(), FluxBias::from_turns(0.5))
        .map_err(|e| e.to_string())?
        .coefficients();
    let ratio = c.g_r.abs() / c.omega_a.max(c.omega_b);
    within("|g|/max(omega)", ratio, 0.20, 0.02)?;
    Ok(format!("|g|/max(omega) = {ratio:.4}"))
}

/// 3. Counter-rotating shift of the lower mode.
fn rwa_shift_check() -> Outcome {
    let (_, minus) = rwa_shift(&CircuitParams::table1(), FluxBias::from_turns(0.5)).map_err(|e| e.to_string())?;
    let shift = mhz(minus);
    rel_within("omega_-^RWA - omega_- [MHz]", shift, 135.0, 0.10)?;
    Ok(format!("shift {shift:.2} MHz"))
}

/// 4. Ground-state photon number and entanglement entropy.
fn ground_state_occupation() -> Outcome {
    let start = Instant::now();
    let c = ModeCoefficients::degenerate(from_ghz(5.0), 0.2);
    let space = TruncatedFockSpace::square(30).map_err(|e| e.to_string())?;
    let h = build_hamiltonian(&c, space).map_err(|e| e.to_string())?;
    let g = ground_state(&h).map_err(|e| e.to_string())?;
    let rho_a = reduced_density(&g.density(), Mode::A);
    let n_a = mean_photon(&rho_a);
    let s_a = von_neumann_entropy(&rho_a);
    let elapsed = start.elapsed();
    within("n_a", n_a, 0.012, 0.002)?;
    within("S_a [bit]", s_a, 0.09, 0.01)?;
    in_time("ground state", elapsed, Duration::from_secs(10))?;
    Ok(format!("n_a = {n_a:.5}, S_a = {s_a:.5} bit, {elapsed:.2?}"))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo).signum();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn crosstalk_grid(p: &CircuitParams, eta: f64, phi0: f64, half: f64) -> Result<SpectrumGrid, String> {
    let biases: Vec<FluxBias> = (0..200)
        .map(|k| FluxBias::rf(phi0 - half + 2.0 * half * k as f64 / 199.0))
        .collect();
    let modes: Vec<_> = biases
        .iter()
        .map(|b| mode_coefficients(p, *b).map(|r| rwa_modes(&r.coefficients())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let f_lo = modes.iter().map(|m| hertz(m.minus)).fold(f64::INFINITY, f64::min) - 15e6;
    let f_hi = modes.iter().map(|m| hertz(m.plus)).fold(f64::NEG_INFINITY, f64::max) + 15e6;
    let probe: Vec<f64> = (0..400).map(|k| f_lo + (f_hi - f_lo) * k as f64 / 399.0).collect();
    let drive = DriveConfig {
        epsilon: from_mhz(1.5),
        eta,
        kappa_a: from_mhz(3.3e-4),
        kappa_b: from_mhz(3.3e-4),
        omega_p: 0.0,
        input_port: Port::A,
    };
    scan_spectrum(p, &biases, &probe, &drive, Signal::TBA).map_err(|e| e.to_string())
}

/// 5. Transmission disappearance points with and without crosstalk.
fn crosstalk_disappearance() -> Outcome {
    let p = CircuitParams::table1();
    let g_of = |phi: f64| mode_coefficients(&p, FluxBias::rf(phi)).unwrap().network.coefficients.g_r;
    let phi0 = zero_coupling_bias(&p, turns_to_rad(0.4), turns_to_rad(0.49)).map_err(|e| e.to_string())?;
    // bias window in which the coupling spans +-25 MHz
    let target = from_mhz(25.0);
    let side = |sign: f64| {
        let mut h = 1e-4;
        while g_of(phi0 + sign * h).abs() < target {
            h *= 1.5;
        }
        (bisect(|x| g_of(phi0 + sign * x).abs() - target, 0.0, h), h)
    };
    let half = side(1.0).0.max(side(-1.0).0);
    let start = Instant::now();
    let with_crosstalk = crosstalk_grid(&p, 0.25, phi0, half)?;
    let elapsed = start.elapsed();
    let without = crosstalk_grid(&p, 0.0, phi0, half)?;
    let opts = DisappearanceOptions::default();
    let dips = find_disappearance(&with_crosstalk, &opts).map_err(|e| e.to_string())?;
    let clean = find_disappearance(&without, &opts).map_err(|e| e.to_string())?;
    if dips.len() != 2 {
        return Err(format!("eta = 0.25: expected two disappearance points, found {dips:?}"));
    }
    let mut g_dips: Vec<f64> = dips.iter().map(|d| mhz(d.g_r)).collect();
    g_dips.sort_by(f64::total_cmp);
    within("negative dip [MHz]", g_dips[0], -11.0, 2.0)?;
    within("positive dip [MHz]", g_dips[1], 11.0, 2.0)?;
    if clean.is_empty() {
        return Err("eta = 0: no disappearance point found".into());
    }
    let resolution = without.g_r.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    for d in &clean {
        within("eta = 0 dip [MHz]", mhz(d.g_r), 0.0, mhz(resolution))?;
    }
    in_time("200x400 scan", elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "eta = 0.25 dips at ({:.2}, {:.2}) MHz; eta = 0 dips within {:.3} MHz of g = 0; scan {elapsed:.2?}",
        g_dips[0],
        g_dips[1],
        mhz(resolution)
    ))
}

/// 6. Coupling range of the three-junction device.
fn three_junction_range() -> Outcome {
    let p = ThreeJunctionParams::fig3();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..1000 {
        let (_, n) = three_junction_coefficients(&p, turns_to_rad(k as f64 / 1000.0)).map_err(|e| e.to_string())?;
        lo = lo.min(n.coefficients.g_r);
        hi = hi.max(n.coefficients.g_r);
    }
    let (lo, hi) = (mhz(lo), mhz(hi));
    rel_within("g_min [MHz]", lo, -291.0, 0.05)?;
    rel_within("g_max [MHz]", hi, 184.0, 0.05)?;
    Ok(format!("g range ({lo:.1}, {hi:.1}) MHz"))
}

/// 7. Numerical spectra and density-matrix steady states against closed forms.
fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_gap = 0.0f64;
    for _ in 0..20 {
        let wa: f64 = rng.random_range(1.0..1.6);
        let wb: f64 = rng.random_range(1.0..1.6);
        let g = rng.random_range(-0.3..0.3) * wa.min(wb);
        let c = ModeCoefficients::new(wa, wb, g);
        let h = build_hamiltonian(&c, TruncatedFockSpace::square(30).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let n = numeric_eigenmodes(&h).map_err(|e| e.to_string())?;
        let exact = eigenmodes(&c).map_err(|e| e.to_string())?;
        for (x, y) in [(n.plus, exact.plus), (n.minus, exact.minus)] {
            worst_gap = worst_gap.max(((x - y) / y).abs());
        }
    }
    let mut worst_moment = 0.0f64;
    let space = TruncatedFockSpace::square(3).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let wa = 1.0;
        let wb = rng.random_range(0.95..1.05);
        let c = ModeCoefficients::new(wa, wb, rng.random_range(-0.03..0.03));
        let d = DriveConfig {
            epsilon: 1e-4,
            eta: rng.random_range(0.0..1.0),
            kappa_a: rng.random_range(0.01..0.1),
            kappa_b: rng.random_range(0.01..0.1),
            omega_p: rng.random_range(0.95..1.05),
            input_port: if rng.random_bool(0.5) { Port::A } else { Port::B },
        };
        let o = lindblad_steady_state_oracle(&c, &d, space).map_err(|e| e.to_string())?;
        let m = steady_state_moments(&c, &d).map_err(|e| e.to_string())?;
        let scale = m.a.norm().max(m.b.norm());
        worst_moment = worst_moment.max((o.a - m.a).norm() / scale).max((o.b - m.b).norm() / scale);
    }
    within("worst relative gap error", worst_gap, 0.0, 1e-3)?;
    within("worst relative moment error", worst_moment, 0.0, 1e-3)?;
    Ok(format!("gaps {worst_gap:.2e}, moments {worst_moment:.2e} (20 + 20 configurations)"))
}

fn perturbed(truth: &CircuitParams, rng: &mut ChaCha8Rng) -> CircuitParams {
    let mut f = || 1.0 + rng.random_range(-0.1..0.1);
    let l = truth.l_a * f();
    CircuitParams {
        l_a: l,
        l_b: l,
        c_a: truth.c_a * f(),
        c_b: truth.c_b * f(),
        l_sh: truth.l_sh * f(),
        l_j0: truth.l_j0 * f(),
        m_0: truth.m_0 * f(),
        l_0: truth.l_0 * f(),
        gamma: truth.gamma * f(),
    }
}

/// 8. Fit round trip without and with noise.
fn fit_round_trip() -> Outcome {
    let truth = CircuitParams::table1();
    let x: Vec<f64> = (0..60).map(|k| turns_to_rad((k as f64 + 0.5) / 60.0 - 0.5)).collect();
    let dense: Vec<f64> = (0..400).map(|k| turns_to_rad((k as f64 + 0.25) / 400.0 - 0.5)).collect();
    let clean = synthetic_peaks(&truth, &x, DEFAULT_BAND_HZ);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fit = fit_parameters(&clean, &FitConfig::new(perturbed(&truth, &mut rng))).map_err(|e| e.to_string())?;
    let curve = branch_rms(&fit.params, &truth, &dense);
    within("noiseless curve RMS [MHz]", curve / 1e6, 0.0, 1.0)?;
    let noise = Normal::new(0.0, 1e6).unwrap();
    let mut rms: Vec<f64> = Vec::new();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let noisy = PeakSet::new(
            clean
                .peaks
                .iter()
                .map(|p| Peak {
                    frequency_hz: p.frequency_hz + noise.sample(&mut rng),
                    ..*p
                })
                .collect(),
        );
        let r = fit_parameters(&noisy, &FitConfig::new(perturbed(&truth, &mut rng))).map_err(|e| e.to_string())?;
        rms.push(r.rms_hz / 1e6);
    }
    rms.sort_by(f64::total_cmp);
    let median = 0.5 * (rms[9] + rms[10]);
    within("median noisy RMS [MHz]", median, 0.0, 1.5)?;
    Ok(format!(
        "noiseless curve RMS {:.3} kHz; noisy median RMS {median:.3} MHz (max {:.3})",
        curve / 1e3,
        rms[19]
    ))
}

/// 9. Closed-form identities.
fn identity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_rwa = 0.0f64;
    for _ in 0..1000 {
        let w = rng.random_range(1.0..10.0);
        let g = rng.random_range(0.1..0.49) * w;
        let c = ModeCoefficients::new(w, w, g);
        let e = eigenmodes(&c).map_err(|e| e.to_string())?;
        let r = rwa_modes(&c);
        for (rw, ex) in [(r.plus, e.plus), (r.minus, e.minus)] {
            worst_rwa = worst_rwa.max(((rw * rw - ex * ex) - g * g).abs() / (g * g));
        }
    }
    let mut worst_network = 0.0f64;
    for _ in 0..1000 {
        let l_sh = rng.random_range(0.05..2.0) * NANO;
        let l_j = rng.random_range(-0.5..5.0) * NANO;
        if (2.0 * l_sh + l_j).abs() < 0.05 * NANO {
            continue;
        }
        let s = star_delta(l_sh, l_j, 0.0).map_err(|e| e.to_string())?;
        worst_network = worst_network.max((s.m_star * (2.0 * l_sh + l_j) - l_sh * l_sh).abs() / (l_sh * l_sh));
    }
    let p = CircuitParams::table1();
    let mut worst_limit = 0.0f64;
    for turns in [0.0, 0.2, 0.5, 0.8] {
        let bias = FluxBias::from_turns(turns);
        let rec = mode_coefficients(&p, bias).map_err(|e| e.to_string())?;
        let limits = infinite_mutual_limits(&p, bias).map_err(|e| e.to_string())?;
        let l_star = rec.l_star();
        let huge = EffectiveCoupler {
            m_star: 1e6 * (p.l_a + p.l_b),
            l_star_a: l_star,
            l_star_b: l_star,
        };
        let n = coefficients_from_network(p.l_a, p.l_b, p.c_a, p.c_b, huge).map_err(|e| e.to_string())?;
        // independent closed form: omega_k = 1/sqrt((L_a0 + L_b0) C_k), g = sqrt(omega_a omega_b)/2
        let total = p.l_a + p.l_b + 2.0 * l_star;
        let oa = 1.0 / (total * p.c_a).sqrt();
        let ob = 1.0 / (total * p.c_b).sqrt();
        for (x, y) in [
            (n.coefficients.omega_a, oa),
            (n.coefficients.omega_b, ob),
            (n.coefficients.g_r, (oa * ob).sqrt() / 2.0),
            (limits.omega_a, oa),
            (limits.g, (oa * ob).sqrt() / 2.0),
        ] {
            worst_limit = worst_limit.max(((x - y) / y).abs());
        }
    }
    within("degenerate RWA identity", worst_rwa, 0.0, 1e-12)?;
    within("network identity", worst_network, 0.0, 1e-12)?;
    within("infinite-mutual limits", worst_limit, 0.0, 1e-4)?;
    Ok(format!(
        "RWA {worst_rwa:.1e}, network {worst_network:.1e}, limits {worst_limit:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("coupling range", coupling_range),
        ("ultrastrong ratio", ultrastrong_ratio),
        ("RWA shift", rwa_shift_check),
        ("ground-state occupation", ground_state_occupation),
        ("crosstalk disappearance", crosstalk_disappearance),
        ("three-junction range", three_junction_range),
        ("oracle equivalence", oracle_equivalence),
        ("fit round trip", fit_round_trip),
        ("identity suite", identity_suite),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
