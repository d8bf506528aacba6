use coupler_core::circuit::{three_junction_coefficients, NetworkRecord};
use coupler_core::fit::{
    extract_peaks_from, fit_parameters, predict_modes, FitConfig, FitResult, FitStatus, Peak, PeakOptions, PeakSet,
};
use coupler_core::fock::{
    build_hamiltonian, excited_state, ground_state, reduced_density, wigner, Eigenstate, GroundStateSummary, Mode,
    QuadratureGrid, TruncatedFockSpace,
};
use coupler_core::io::{
    fit_config_from_json, params_to_json, peaks_meta, read_peaks_csv, read_spectrum_csv, record_row, records_meta,
    spectrum_meta, ColumnMeta, DeviceParams, Dimension, TableMeta, RECORD_COLUMNS,
};
use coupler_core::lindblad::{
    coupling_window, find_disappearance, scan_spectrum, zero_coupling_bias, Branch, DisappearanceOptions,
    DriveConfig, Signal, SpectrumGrid,
};
use coupler_core::units::{angular, ghz, hertz, mhz, rad_to_turns, turns_to_rad};
use coupler_core::{eigenmodes, mode_coefficients, rwa_modes, CircuitParams, FluxBias, ModeCoefficients};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

use crate::artifacts::Artifacts;
use crate::error::CliError;
use crate::parse::{quantity, read_device, read_json, Sweep};
use crate::{CoeffsArgs, CrosstalkArgs, FitArgs, QuantumArgs, ScanArgs, SpectrumArgs, StateChoice};

/// Coefficient record at one bias: `(phi_ex, phi_star, network)`.
pub type DeviceRecord = (f64, f64, NetworkRecord);

fn at_bias(phi: f64, e: coupler_core::Error) -> CliError {
    let msg = format!("at phi_ex = {} turn: {e}", rad_to_turns(phi));
    if e.is_input_error() {
        CliError::Config(msg)
    } else {
        CliError::Numeric(msg)
    }
}

pub fn device_records(device: &DeviceParams, phis: &[f64], local_leak: bool) -> Result<Vec<DeviceRecord>, CliError> {
    match device {
        DeviceParams::SingleJunction(p) => {
            let biases: Vec<FluxBias> = phis
                .iter()
                .map(|&x| if local_leak { FluxBias::with_local_leak(x) } else { FluxBias::rf(x) })
                .collect();
            coupler_core::circuit::record_sweep(p, &biases)
                .into_iter()
                .zip(phis)
                .map(|(r, &x)| r.map(|r| (x, r.phi_star, r.network)).map_err(|e| at_bias(x, e)))
                .collect()
        }
        DeviceParams::ThreeJunction(p) => {
            if local_leak {
                return Err(CliError::config("--local-leak applies to the single-junction coupler only"));
            }
            phis.iter()
                .map(|&x| {
                    three_junction_coefficients(p, x)
                        .map(|(m, n)| (x, m.phases[0], n))
                        .map_err(|e| at_bias(x, e))
                })
                .collect()
        }
    }
}

fn device_json(device: &DeviceParams) -> Value {
    match device {
        DeviceParams::SingleJunction(p) => params_to_json(p),
        DeviceParams::ThreeJunction(p) => coupler_core::io::three_junction_to_json(p),
    }
}

pub fn coefficient_table(records: &[DeviceRecord]) -> Vec<Vec<f64>> {
    records.iter().map(|(x, s, n)| record_row(*x, *s, n)).collect()
}

pub fn coeffs(a: &CoeffsArgs) -> Result<(), CliError> {
    let device = read_device(&a.params)?;
    let phis = match &a.phi_ex {
        Some(v) => vec![quantity(v, Dimension::Angle)?],
        None => Sweep::parse(&a.sweep, Dimension::Angle)?.values(),
    };
    let records = device_records(&device, &phis, a.local_leak)?;
    let mut out = Artifacts::new(&a.output.out);
    let meta = records_meta().with("params", device_json(&device)).with("local_leak", a.local_leak);
    out.table("coeffs", meta, coefficient_table(&records))?;
    out.commit()?;
    Ok(())
}

pub fn branches_meta() -> TableMeta {
    let f = |name: &str, what: &str| ColumnMeta::new(name, "GHz", what);
    TableMeta::new(
        "branches/1",
        vec![
            ColumnMeta::new("phi_ex", "turn", "external flux phase / 2 pi"),
            f("omega_plus", "upper normal mode"),
            f("omega_minus", "lower normal mode"),
            f("omega_plus_rwa", "upper mode without counter-rotating terms"),
            f("omega_minus_rwa", "lower mode without counter-rotating terms"),
        ],
    )
}

pub fn branch_table(records: &[DeviceRecord]) -> Vec<Vec<f64>> {
    let pick = |name: &str| RECORD_COLUMNS.iter().position(|c| *c == name).unwrap();
    let cols: Vec<usize> = ["phi_ex", "omega_plus", "omega_minus", "omega_plus_rwa", "omega_minus_rwa"]
        .iter()
        .map(|c| pick(c))
        .collect();
    coefficient_table(records)
        .into_iter()
        .map(|row| cols.iter().map(|&k| row[k]).collect())
        .collect()
}

fn band(text: &str) -> Result<(f64, f64), CliError> {
    let s = Sweep::parse(&format!("{text}:2"), Dimension::Frequency)?;
    if !(s.start < s.stop) {
        return Err(CliError::config(format!("band `{text}` must be low:high")));
    }
    Ok((s.start, s.stop))
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let device = read_device(&a.params)?;
    let phis = Sweep::parse(&a.sweep, Dimension::Angle)?.values();
    let band = band(&a.band)?;
    let sigma = quantity(&a.noise, Dimension::Frequency)?;
    if !(sigma >= 0.0) {
        return Err(CliError::config("--noise must be non-negative"));
    }
    let records = device_records(&device, &phis, a.local_leak)?;
    let mut out = Artifacts::new(&a.output.out);
    out.table(
        "branches",
        branches_meta().with("params", device_json(&device)),
        branch_table(&records),
    )?;
    if a.peaks {
        let noise = Normal::new(0.0, sigma).map_err(|e| CliError::config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let mut peaks = Vec::new();
        for (x, _, n) in &records {
            let Ok(m) = eigenmodes(&n.coefficients) else { continue };
            for omega in [m.minus, m.plus] {
                let f = hertz(omega) + noise.sample(&mut rng);
                if f >= band.0 && f <= band.1 {
                    peaks.push(Peak {
                        bias: *x,
                        frequency_hz: f,
                        weight: 1.0,
                    });
                }
            }
        }
        let set = PeakSet::new(peaks);
        let meta = peaks_meta().with("noise_Hz", sigma).with("seed", a.seed);
        out.table("peaks", meta, peak_table(&set))?;
    }
    out.commit()?;
    Ok(())
}

fn peak_table(set: &PeakSet) -> Vec<Vec<f64>> {
    set.peaks
        .iter()
        .map(|p| vec![rad_to_turns(p.bias), p.frequency_hz, p.weight])
        .collect()
}

/// Eigenstate of the two-mode Hamiltonian at coupling `ratio * omega_a`.
pub fn solve_state(
    omega_a: f64,
    omega_b: f64,
    ratio: f64,
    cutoff: Option<usize>,
    state: StateChoice,
) -> Result<Eigenstate, CliError> {
    let c = ModeCoefficients::new(omega_a, omega_b, ratio * omega_a);
    let space = match cutoff {
        Some(n) => TruncatedFockSpace::square(n)?,
        None => TruncatedFockSpace::for_ratio(ratio)?,
    };
    let h = build_hamiltonian(&c, space)?;
    let s = match state {
        StateChoice::Ground => ground_state(&h)?,
        StateChoice::Excited => excited_state(&h)?,
    };
    Ok(s)
}

pub fn fock_table(summary: &GroundStateSummary) -> (TableMeta, Vec<Vec<f64>>) {
    let meta = TableMeta::new(
        "fock/1",
        vec![
            ColumnMeta::new("n", "1", "photon number of resonator a"),
            ColumnMeta::new("probability", "1", "P(n) of the reduced state"),
        ],
    );
    let rows = summary
        .fock_a
        .iter()
        .enumerate()
        .map(|(n, p)| vec![n as f64, *p])
        .collect();
    (meta, rows)
}

pub fn wigner_table(state: &Eigenstate, extent: f64, points: usize) -> Result<(TableMeta, Vec<Vec<f64>>), CliError> {
    let rho_a = reduced_density(&state.density(), Mode::A);
    let w = wigner(&rho_a, &QuadratureGrid::square(extent, points))?;
    if !w.is_covered() {
        log::warn!("Wigner window +-{extent} cuts off |W| = {:e} at the boundary", w.boundary_max);
    }
    let meta = TableMeta::new(
        "wigner/1",
        vec![
            ColumnMeta::new("q", "1", "quadrature, a = q + i p"),
            ColumnMeta::new("p", "1", "quadrature"),
            ColumnMeta::new("W", "1", "Wigner function of resonator a"),
        ],
    )
    .with("integral", w.integral())
    .with("boundary_max", w.boundary_max)
    .with("covered", w.is_covered());
    let mut rows = Vec::with_capacity(w.q.len() * w.p.len());
    for (i, q) in w.q.iter().enumerate() {
        for (j, p) in w.p.iter().enumerate() {
            rows.push(vec![*q, *p, w.values[(i, j)]]);
        }
    }
    Ok((meta, rows))
}

pub fn summary_json(s: &GroundStateSummary, ratio: f64, state: StateChoice) -> Value {
    json!({
        "state": format!("{state:?}").to_lowercase(),
        "g_over_omega": ratio,
        "energy_GHz": ghz(s.energy),
        "cutoff": s.cutoff,
        "n_a": s.n_a,
        "n_b": s.n_b,
        "entropy_a_bits": s.entropy_a,
        "purity_a": s.purity_a,
        "odd_parity": s.odd_parity,
        "edge_population": s.edge_population,
    })
}

pub fn sweep_meta(state: StateChoice) -> TableMeta {
    TableMeta::new(
        "quantum-sweep/1",
        vec![
            ColumnMeta::new("g_over_omega", "1", "coupling ratio"),
            ColumnMeta::new("n_a", "1", "mean photon number of resonator a"),
            ColumnMeta::new("n_b", "1", "mean photon number of resonator b"),
            ColumnMeta::new("S_a", "bit", "entanglement entropy of resonator a"),
            ColumnMeta::new("purity_a", "1", "Tr rho_a^2"),
            ColumnMeta::new("edge_population", "1", "population of the last kept level"),
        ],
    )
    .with("state", format!("{state:?}").to_lowercase())
}

pub fn sweep_row(s: &GroundStateSummary, ratio: f64) -> Vec<f64> {
    vec![ratio, s.n_a, s.n_b, s.entropy_a, s.purity_a, s.edge_population]
}

pub fn quantum(a: &QuantumArgs) -> Result<(), CliError> {
    let ratios = Sweep::parse(&a.ratio, Dimension::Dimensionless)?;
    let omega_a = angular(quantity(&a.omega, Dimension::Frequency)?);
    let omega_b = match &a.omega_b {
        Some(v) => angular(quantity(v, Dimension::Frequency)?),
        None => omega_a,
    };
    if !(omega_a > 0.0 && omega_b > 0.0) {
        return Err(CliError::config("resonator frequencies must be positive"));
    }
    for r in ratios.values() {
        if !ModeCoefficients::new(omega_a, omega_b, r * omega_a).is_stable() {
            return Err(CliError::config(format!("g/omega = {r} is beyond the stability limit")));
        }
    }
    let mut out = Artifacts::new(&a.output.out);
    let attrs = |m: TableMeta| m.with("omega_a_GHz", ghz(omega_a)).with("omega_b_GHz", ghz(omega_b));
    if ratios.count > 1 {
        let mut rows = Vec::new();
        for r in ratios.values() {
            log::info!("g/omega = {r}");
            let s = GroundStateSummary::from_state(&solve_state(omega_a, omega_b, r, a.cutoff, a.state)?);
            rows.push(sweep_row(&s, r));
        }
        out.table("quantum_sweep", attrs(sweep_meta(a.state)), rows)?;
    } else {
        let r = ratios.start;
        let state = solve_state(omega_a, omega_b, r, a.cutoff, a.state)?;
        let s = GroundStateSummary::from_state(&state);
        if s.edge_population > 1e-6 {
            log::warn!("top Fock level holds {:e}; raise --cutoff", s.edge_population);
        }
        let mut summary = summary_json(&s, r, a.state);
        summary["omega_a_GHz"] = json!(ghz(omega_a));
        summary["omega_b_GHz"] = json!(ghz(omega_b));
        out.json("quantum", "quantum-summary/1", &summary)?;
        let (meta, rows) = fock_table(&s);
        out.table("fock_a", attrs(meta), rows)?;
        if a.wigner_points > 0 {
            let (meta, rows) = wigner_table(&state, a.wigner_extent, a.wigner_points)?;
            out.table("wigner_a", attrs(meta), rows)?;
        }
        if a.rho {
            let mut blob = Vec::new();
            reduced_density(&state.density(), Mode::A).write_blob(&mut blob)?;
            out.binary("rho_a.bin", "rho/1", blob);
        }
    }
    out.commit()?;
    Ok(())
}

fn single_junction(device: DeviceParams, what: &str) -> Result<CircuitParams, CliError> {
    match device {
        DeviceParams::SingleJunction(p) => Ok(p),
        DeviceParams::ThreeJunction(_) => Err(CliError::config(format!("{what} needs single-junction parameters"))),
    }
}

/// First sign change of `g_r` on `(0, 0.5]` turn, refined by bisection.
pub fn default_zero_bias(p: &CircuitParams) -> Result<f64, CliError> {
    let g = |t: f64| mode_coefficients(p, FluxBias::from_turns(t)).map(|r| r.network.coefficients.g_r);
    let steps = 200;
    let mut prev = g(0.0)?;
    for k in 1..=steps {
        let t = 0.5 * k as f64 / steps as f64;
        let cur = g(t)?;
        if cur.signum() != prev.signum() {
            let lo = 0.5 * (k - 1) as f64 / steps as f64;
            return Ok(zero_coupling_bias(p, turns_to_rad(lo), turns_to_rad(t))?);
        }
        prev = cur;
    }
    Err(CliError::config("coupling does not change sign on [0, 0.5] turn; pass --bias"))
}

pub struct CrosstalkSetup {
    pub params: CircuitParams,
    pub signal: Signal,
    pub drive: DriveConfig,
    pub biases: Vec<f64>,
    pub probe_hz: Option<Vec<f64>>,
    pub probe_points: usize,
}

pub fn crosstalk_grid(s: &CrosstalkSetup) -> Result<SpectrumGrid, CliError> {
    let biases: Vec<FluxBias> = s.biases.iter().map(|&x| FluxBias::rf(x)).collect();
    let probe = match &s.probe_hz {
        Some(p) => p.clone(),
        None => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for b in &biases {
                let m = rwa_modes(&mode_coefficients(&s.params, *b).map_err(|e| at_bias(b.phi_ex, e))?.coefficients());
                lo = lo.min(hertz(m.minus));
                hi = hi.max(hertz(m.plus));
            }
            Sweep {
                start: lo - 15e6,
                stop: hi + 15e6,
                count: s.probe_points,
            }
            .values()
        }
    };
    Ok(scan_spectrum(&s.params, &biases, &probe, &s.drive, s.signal)?)
}

pub fn grid_axis_table(grid: &SpectrumGrid) -> (TableMeta, Vec<Vec<f64>>) {
    let meta = TableMeta::new(
        "crosstalk-axis/1",
        vec![
            ColumnMeta::new("bias", "turn", "phi_ex / 2 pi"),
            ColumnMeta::new("g_r", "MHz", "coupling, f = g / 2 pi"),
            ColumnMeta::new("omega_plus", "GHz", "upper branch"),
            ColumnMeta::new("omega_minus", "GHz", "lower branch"),
        ],
    );
    let rows = (0..grid.bias.len())
        .map(|i| {
            vec![
                rad_to_turns(grid.bias[i]),
                mhz(grid.g_r[i]),
                ghz(grid.branches[i].plus),
                ghz(grid.branches[i].minus),
            ]
        })
        .collect();
    (meta, rows)
}

pub fn disappearance_table(grid: &SpectrumGrid) -> Result<(TableMeta, Vec<Vec<f64>>), CliError> {
    let dips = find_disappearance(grid, &DisappearanceOptions::default())?;
    let meta = TableMeta::new(
        "disappearance/1",
        vec![
            ColumnMeta::new("branch", "1", "+1 upper, -1 lower"),
            ColumnMeta::new("bias", "turn", "phi_ex / 2 pi"),
            ColumnMeta::new("g_r", "MHz", "coupling at the dip"),
            ColumnMeta::new("depth", "1", "dip strength over branch maximum"),
        ],
    );
    let rows = dips
        .iter()
        .map(|d| {
            let b = if d.branch == Branch::Plus { 1.0 } else { -1.0 };
            vec![b, rad_to_turns(d.bias), mhz(d.g_r), d.depth]
        })
        .collect();
    Ok((meta, rows))
}

pub fn spectrum_rows(grid: &SpectrumGrid) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(grid.bias.len() * grid.probe_hz.len());
    for (i, x) in grid.bias.iter().enumerate() {
        for (j, f) in grid.probe_hz.iter().enumerate() {
            rows.push(vec![rad_to_turns(*x), *f, grid.amplitude[(i, j)]]);
        }
    }
    rows
}

/// Writes `spectrum`, `axis` and `disappearance` tables for one grid.
pub fn stage_crosstalk(out: &mut Artifacts, prefix: &str, s: &CrosstalkSetup, average_hz: Option<f64>) -> Result<(), CliError> {
    let mut grid = crosstalk_grid(s)?;
    let dips = disappearance_table(&grid)?;
    if let Some(w) = average_hz {
        grid = grid.moving_average(w);
    }
    let meta = spectrum_meta()
        .with("signal", s.signal.label())
        .with("eta", s.drive.eta)
        .with("epsilon_MHz", mhz(s.drive.epsilon))
        .with("kappa_a_MHz", mhz(s.drive.kappa_a))
        .with("kappa_b_MHz", mhz(s.drive.kappa_b))
        .with("average_Hz", average_hz.map_or(Value::Null, Value::from))
        .with("params", params_to_json(&s.params));
    out.table(&format!("{prefix}spectrum"), meta, spectrum_rows(&grid))?;
    let (meta, rows) = grid_axis_table(&grid);
    out.table(&format!("{prefix}axis"), meta, rows)?;
    let (meta, rows) = dips;
    out.table(&format!("{prefix}disappearance"), meta, rows)?;
    Ok(())
}

pub fn crosstalk(a: &CrosstalkArgs) -> Result<(), CliError> {
    let params = single_junction(read_device(&a.params)?, "crosstalk")?;
    let signal = Signal::parse(&a.signal)?;
    let drive = DriveConfig {
        epsilon: angular(quantity(&a.epsilon, Dimension::Frequency)?),
        eta: a.eta,
        kappa_a: angular(quantity(&a.kappa_a, Dimension::Frequency)?),
        kappa_b: angular(quantity(&a.kappa_b, Dimension::Frequency)?),
        omega_p: 0.0,
        input_port: signal.input(),
    };
    drive.validate()?;
    if a.bias_points < 2 || a.probe_points < 2 {
        return Err(CliError::config("grids need at least two points per axis"));
    }
    let biases = match &a.bias {
        Some(b) => Sweep::parse(b, Dimension::Angle)?.values(),
        None => {
            let phi0 = default_zero_bias(&params)?;
            let span = angular(quantity(&a.g_span, Dimension::Frequency)?);
            let (lo, hi) = coupling_window(&params, phi0, span)?;
            Sweep {
                start: lo,
                stop: hi,
                count: a.bias_points,
            }
            .values()
        }
    };
    let probe_hz = a
        .probe
        .as_ref()
        .map(|p| Sweep::parse(p, Dimension::Frequency).map(|s| s.values()))
        .transpose()?;
    let average = a.average.as_ref().map(|w| quantity(w, Dimension::Frequency)).transpose()?;
    let setup = CrosstalkSetup {
        params,
        signal,
        drive,
        biases,
        probe_hz,
        probe_points: a.probe_points,
    };
    let mut out = Artifacts::new(&a.output.out);
    stage_crosstalk(&mut out, "", &setup, average)?;
    out.commit()?;
    Ok(())
}

fn fit_json(r: &FitResult) -> Value {
    json!({
        "params": params_to_json(&r.params),
        "flux_scale": r.calibration.scale,
        "flux_offset_rad": r.calibration.offset,
        "free": r.free.iter().map(|p| p.name()).collect::<Vec<_>>(),
        "status": format!("{:?}", r.status),
        "iterations": r.iterations,
        "rms_MHz": r.rms_hz / 1e6,
        "holdout_rms_MHz": r.holdout_rms_hz.map(|h| h / 1e6),
        "condition_number": r.condition_number,
        "rank_deficient": r.rank_deficient,
        "singular_values": r.singular_values,
        "loss_history": r.loss_history,
    })
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let initial = single_junction(read_device(&a.params)?, "fit")?;
    let cfg = match &a.config {
        Some(path) => fit_config_from_json(initial, read_json(path)?)?,
        None => FitConfig::new(initial),
    };
    let peaks = match (&a.peaks, &a.spectrum) {
        (Some(p), _) => read_peaks_csv(std::fs::File::open(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?)?,
        (None, Some(s)) => {
            let t = read_spectrum_csv(std::fs::File::open(s).map_err(|e| CliError::config(format!("{}: {e}", s.display())))?)?;
            let opts = PeakOptions {
                k: a.threshold,
                band_hz: cfg.band_hz,
                ..PeakOptions::default()
            };
            extract_peaks_from(&t.bias, &t.probe_hz, &t.amplitude, &opts)
        }
        (None, None) => return Err(CliError::config("give --peaks or --spectrum")),
    };
    let result = fit_parameters(&peaks, &cfg)?;
    if result.rank_deficient {
        log::warn!("Jacobian is ill-conditioned ({:e}); some parameters are not identified", result.condition_number);
    }
    if result.status == FitStatus::Stalled {
        log::warn!("fit stalled after {} iterations", result.iterations);
    }
    let mut out = Artifacts::new(&a.output.out);
    out.json("fit", "fit-result/1", &fit_json(&result))?;
    let meta = TableMeta::new(
        "fit-residuals/1",
        vec![
            ColumnMeta::new("bias", "turn", "peak bias coordinate / 2 pi"),
            ColumnMeta::new("frequency_Hz", "Hz", "measured peak"),
            ColumnMeta::new("predicted_Hz", "Hz", "nearest fitted branch"),
            ColumnMeta::new("residual_Hz", "Hz", "measured - predicted"),
            ColumnMeta::new("branch", "1", "+1 upper, -1 lower, 0 none"),
            ColumnMeta::new("holdout", "1", "1 if scored but not fitted"),
        ],
    );
    let rows = result
        .residuals
        .iter()
        .map(|r| {
            let b = match r.branch {
                Some(Branch::Plus) => 1.0,
                Some(Branch::Minus) => -1.0,
                None => 0.0,
            };
            vec![rad_to_turns(r.bias), r.frequency_hz, r.predicted_hz, r.residual_hz, b, f64::from(u8::from(r.holdout))]
        })
        .collect();
    out.table("residuals", meta, rows)?;
    let (lo, hi) = peaks
        .peaks
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.bias), hi.max(p.bias)));
    let xs = Sweep { start: lo, stop: hi, count: 401 }.values();
    let biases: Vec<FluxBias> = xs
        .iter()
        .map(|&x| {
            let phi = result.calibration.phi_ex(x);
            if cfg.local_leak { FluxBias::with_local_leak(phi) } else { FluxBias::rf(phi) }
        })
        .collect();
    let rows = xs
        .iter()
        .zip(predict_modes(&result.params, &biases))
        .map(|(x, m)| {
            let (p, n) = m.map_or((f64::NAN, f64::NAN), |m| (hertz(m.plus), hertz(m.minus)));
            vec![rad_to_turns(*x), p, n]
        })
        .collect();
    let meta = TableMeta::new(
        "fit-branches/1",
        vec![
            ColumnMeta::new("bias", "turn", "bias coordinate / 2 pi"),
            ColumnMeta::new("omega_plus_Hz", "Hz", "fitted upper branch"),
            ColumnMeta::new("omega_minus_Hz", "Hz", "fitted lower branch"),
        ],
    );
    out.table("fit_branches", meta, rows)?;
    out.commit()?;
    Ok(())
}

pub fn scan(a: &ScanArgs) -> Result<(), CliError> {
    let path = &a.spectrum;
    let t = read_spectrum_csv(std::fs::File::open(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?)?;
    let opts = PeakOptions {
        k: a.threshold,
        band_hz: band(&a.band)?,
        ..PeakOptions::default()
    };
    let params = a.params.as_ref().map(|p| read_device(p).and_then(|d| single_junction(d, "scan"))).transpose()?;
    let signal = Signal::parse(&a.signal)?;
    let peaks = extract_peaks_from(&t.bias, &t.probe_hz, &t.amplitude, &opts);
    let mut out = Artifacts::new(&a.output.out);
    out.table("peaks", peaks_meta().with("threshold_sigma", a.threshold), peak_table(&peaks))?;
    if let Some(p) = params {
        let records = device_records(&DeviceParams::SingleJunction(p), &t.bias, false)?;
        let grid = SpectrumGrid {
            bias: t.bias.clone(),
            g_r: records.iter().map(|r| r.2.coefficients.g_r).collect(),
            probe_hz: t.probe_hz.clone(),
            amplitude: t.amplitude.clone(),
            signal,
            // not recorded in spectrum files
            eta: f64::NAN,
            branches: records.iter().map(|r| rwa_modes(&r.2.coefficients)).collect(),
        };
        let (meta, rows) = disappearance_table(&grid)?;
        out.table("disappearance", meta, rows)?;
    }
    out.commit()?;
    Ok(())
}
