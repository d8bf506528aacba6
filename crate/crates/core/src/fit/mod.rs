//! Peak extraction and recovery of circuit parameters from mode branches.

mod model;
mod peaks;

pub use model::{g_range, predict_modes, rwa_shift, CouplingRange};
pub use peaks::{column_peaks, extract_peaks, extract_peaks_from, noise_floor, Peak, PeakOptions, PeakSet, DEFAULT_BAND_HZ};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitParams, FluxBias, NormalModes};
use crate::error::{Error, Result};
use crate::lindblad::Branch;
use crate::units::{hertz, MEGA};

/// Residual assigned to points the model cannot predict [MHz].
const FAILED_PREDICTION_MHZ: f64 = 1e4;

/// Condition number above which the fit is flagged as degenerate.
pub const CONDITION_WARNING: f64 = 1e8;

/// Fittable quantities, keyed by their parameter-file names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FitParam {
    #[serde(rename = "L_ab")]
    Lab,
    #[serde(rename = "L_a")]
    La,
    #[serde(rename = "L_b")]
    Lb,
    #[serde(rename = "C_a")]
    Ca,
    #[serde(rename = "C_b")]
    Cb,
    #[serde(rename = "L_sh")]
    Lsh,
    #[serde(rename = "L_J0")]
    Lj0,
    #[serde(rename = "M_0")]
    M0,
    #[serde(rename = "L_0")]
    L0,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "flux_scale")]
    FluxScale,
    #[serde(rename = "flux_offset")]
    FluxOffset,
}

impl FitParam {
    pub const CIRCUIT: [FitParam; 10] = [
        FitParam::Lab,
        FitParam::La,
        FitParam::Lb,
        FitParam::Ca,
        FitParam::Cb,
        FitParam::Lsh,
        FitParam::Lj0,
        FitParam::M0,
        FitParam::L0,
        FitParam::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParam::Lab => "L_ab",
            FitParam::La => "L_a",
            FitParam::Lb => "L_b",
            FitParam::Ca => "C_a",
            FitParam::Cb => "C_b",
            FitParam::Lsh => "L_sh",
            FitParam::Lj0 => "L_J0",
            FitParam::M0 => "M_0",
            FitParam::L0 => "L_0",
            FitParam::Gamma => "gamma",
            FitParam::FluxScale => "flux_scale",
            FitParam::FluxOffset => "flux_offset",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [FitParam::FluxScale, FitParam::FluxOffset]
            .into_iter()
            .chain(FitParam::CIRCUIT)
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("parameter", format!("unknown fit parameter `{s}`")))
    }

    /// Natural size used to scale the optimizer variable.
    fn typical(self) -> f64 {
        match self {
            FitParam::Ca | FitParam::Cb => 1e-13,
            FitParam::Gamma => 0.05,
            FitParam::FluxScale | FitParam::FluxOffset => 1.0,
            _ => 1e-10,
        }
    }
}

/// Affine map from the peak bias coordinate to `phi_ex`: `scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCalibration {
    pub scale: f64,
    pub offset: f64,
}

impl Default for FluxCalibration {
    fn default() -> Self {
        Self { scale: 1.0, offset: 0.0 }
    }
}

impl FluxCalibration {
    pub fn phi_ex(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub lower: f64,
    pub upper: f64,
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub initial: CircuitParams,
    pub calibration: FluxCalibration,
    /// Bounds and freeze flags; parameters absent here use [`FitConfig::default_bounds`].
    pub bounds: BTreeMap<FitParam, ParamBounds>,
    /// Fit a single `L_ab` for both resonators.
    pub tie_resonators: bool,
    /// Include the dc-loop pickup of the local flux line.
    pub local_leak: bool,
    pub max_iterations: usize,
    /// Relative loss decrease below which the fit stops.
    pub loss_tolerance: f64,
    /// Every `n`-th point is held out of the fit and only scored.
    pub holdout_stride: Option<usize>,
    pub band_hz: (f64, f64),
}

impl FitConfig {
    pub fn new(initial: CircuitParams) -> Self {
        Self {
            initial,
            calibration: FluxCalibration::default(),
            bounds: BTreeMap::new(),
            tie_resonators: true,
            local_leak: false,
            max_iterations: 200,
            loss_tolerance: 1e-12,
            holdout_stride: Some(5),
            band_hz: DEFAULT_BAND_HZ,
        }
    }

    pub fn freeze(mut self, p: FitParam) -> Self {
        let b = self.bounds_of(p);
        self.bounds.insert(p, ParamBounds { frozen: true, ..b });
        self
    }

    pub fn free(mut self, p: FitParam) -> Self {
        let b = self.bounds_of(p);
        self.bounds.insert(p, ParamBounds { frozen: false, ..b });
        self
    }

    pub fn freeze_all(mut self) -> Self {
        for p in FitParam::CIRCUIT.into_iter().chain([FitParam::FluxScale, FitParam::FluxOffset]) {
            self = self.freeze(p);
        }
        self
    }

    /// Defaults: circuit values within a factor of four of the start (`M_0`,
    /// `L_0` down to zero), `gamma` in `[0, 0.95]`, flux calibration frozen.
    pub fn default_bounds(&self, p: FitParam) -> ParamBounds {
        let v = self.value_of(p);
        let (lower, upper, frozen) = match p {
            FitParam::M0 | FitParam::L0 => (0.0, 4.0 * v.max(p.typical()), false),
            FitParam::Gamma => (0.0, 0.95, false),
            FitParam::FluxScale => (0.5 * v, 2.0 * v, true),
            FitParam::FluxOffset => (v - std::f64::consts::PI, v + std::f64::consts::PI, true),
            _ => (0.25 * v, 4.0 * v, false),
        };
        ParamBounds { lower, upper, frozen }
    }

    pub fn bounds_of(&self, p: FitParam) -> ParamBounds {
        self.bounds.get(&p).copied().unwrap_or_else(|| self.default_bounds(p))
    }

    fn value_of(&self, p: FitParam) -> f64 {
        read(&self.initial, &self.calibration, p)
    }

    /// Free parameters in a fixed order.
    pub fn free_parameters(&self) -> Vec<FitParam> {
        let mut out = Vec::new();
        for p in FitParam::CIRCUIT.into_iter().chain([FitParam::FluxScale, FitParam::FluxOffset]) {
            let tied_out = match p {
                FitParam::Lab => !self.tie_resonators,
                FitParam::La | FitParam::Lb => self.tie_resonators,
                _ => false,
            };
            if !tied_out && !self.bounds_of(p).frozen {
                out.push(p);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        for p in self.free_parameters() {
            let b = self.bounds_of(p);
            let v = self.value_of(p);
            if !(b.lower <= b.upper) || !(b.lower..=b.upper).contains(&v) {
                return Err(Error::invalid(
                    "bounds",
                    format!("{}: start {v:e} outside [{:e}, {:e}]", p.name(), b.lower, b.upper),
                ));
            }
        }
        if self.calibration.scale == 0.0 || !self.calibration.scale.is_finite() {
            return Err(Error::invalid("flux_scale", "must be finite and non-zero"));
        }
        if self.holdout_stride == Some(0) || self.holdout_stride == Some(1) {
            return Err(Error::invalid("holdout", "stride must be at least 2"));
        }
        Ok(())
    }
}

fn read(c: &CircuitParams, cal: &FluxCalibration, p: FitParam) -> f64 {
    match p {
        FitParam::Lab | FitParam::La => c.l_a,
        FitParam::Lb => c.l_b,
        FitParam::Ca => c.c_a,
        FitParam::Cb => c.c_b,
        FitParam::Lsh => c.l_sh,
        FitParam::Lj0 => c.l_j0,
        FitParam::M0 => c.m_0,
        FitParam::L0 => c.l_0,
        FitParam::Gamma => c.gamma,
        FitParam::FluxScale => cal.scale,
        FitParam::FluxOffset => cal.offset,
    }
}

fn write(c: &mut CircuitParams, cal: &mut FluxCalibration, p: FitParam, v: f64) {
    match p {
        FitParam::Lab => {
            c.l_a = v;
            c.l_b = v;
        }
        FitParam::La => c.l_a = v,
        FitParam::Lb => c.l_b = v,
        FitParam::Ca => c.c_a = v,
        FitParam::Cb => c.c_b = v,
        FitParam::Lsh => c.l_sh = v,
        FitParam::Lj0 => c.l_j0 = v,
        FitParam::M0 => c.m_0 = v,
        FitParam::L0 => c.l_0 = v,
        FitParam::Gamma => c.gamma = v,
        FitParam::FluxScale => cal.scale = v,
        FitParam::FluxOffset => cal.offset = v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    /// Relative loss decrease fell below the tolerance.
    Converged,
    /// No free parameters; the start was only evaluated.
    NothingToFit,
    /// Damping grew without finding a lower loss.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub bias: f64,
    pub frequency_hz: f64,
    /// Nearest predicted branch; `None` where the model failed.
    pub branch: Option<Branch>,
    pub predicted_hz: f64,
    pub residual_hz: f64,
    pub holdout: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params: CircuitParams,
    pub calibration: FluxCalibration,
    pub free: Vec<FitParam>,
    /// RMS over fitted points [Hz].
    pub rms_hz: f64,
    /// RMS over held-out points [Hz].
    pub holdout_rms_hz: Option<f64>,
    pub residuals: Vec<PointResidual>,
    pub status: FitStatus,
    pub iterations: usize,
    /// Loss after each accepted step, starting with the initial loss.
    pub loss_history: Vec<f64>,
    /// Singular values of the scaled Jacobian at the solution.
    pub singular_values: Vec<f64>,
    pub condition_number: f64,
    pub rank_deficient: bool,
}

struct Problem<'a> {
    peaks: &'a [Peak],
    fit_mask: Vec<bool>,
    base: CircuitParams,
    base_cal: FluxCalibration,
    free: Vec<FitParam>,
    scale: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    local_leak: bool,
}

impl Problem<'_> {
    fn unpack(&self, u: &DVector<f64>) -> (CircuitParams, FluxCalibration) {
        let mut c = self.base;
        let mut cal = self.base_cal;
        for (k, &p) in self.free.iter().enumerate() {
            write(&mut c, &mut cal, p, u[k] * self.scale[k]);
        }
        (c, cal)
    }

    fn bias(&self, cal: &FluxCalibration, x: f64) -> FluxBias {
        let phi = cal.phi_ex(x);
        if self.local_leak {
            FluxBias::with_local_leak(phi)
        } else {
            FluxBias::rf(phi)
        }
    }

    /// Predicted branch frequencies [Hz] of every point.
    fn predict(&self, u: &DVector<f64>) -> Vec<Option<NormalModes>> {
        let (c, cal) = self.unpack(u);
        if c.validate().is_err() {
            return vec![None; self.peaks.len()];
        }
        let biases: Vec<FluxBias> = self.peaks.iter().map(|p| self.bias(&cal, p.bias)).collect();
        predict_modes(&c, &biases)
            .into_iter()
            .map(|m| {
                m.map(|m| NormalModes {
                    plus: hertz(m.plus),
                    minus: hertz(m.minus),
                })
            })
            .collect()
    }

    fn assign(&self, pred: &[Option<NormalModes>]) -> Vec<Option<Branch>> {
        pred.iter()
            .zip(self.peaks)
            .map(|(m, p)| {
                m.map(|m| {
                    if (p.frequency_hz - m.plus).abs() <= (p.frequency_hz - m.minus).abs() {
                        Branch::Plus
                    } else {
                        Branch::Minus
                    }
                })
            })
            .collect()
    }

    /// Weighted residuals [MHz] of the fitted points under a fixed assignment.
    fn residuals(&self, pred: &[Option<NormalModes>], assign: &[Option<Branch>]) -> DVector<f64> {
        let rows: Vec<f64> = (0..self.peaks.len())
            .filter(|&i| self.fit_mask[i])
            .map(|i| {
                let p = &self.peaks[i];
                let w = p.weight.max(0.0).sqrt();
                match (pred[i], assign[i]) {
                    (Some(m), Some(b)) => {
                        let f = if b == Branch::Plus { m.plus } else { m.minus };
                        w * (f - p.frequency_hz) / MEGA
                    }
                    _ => w * FAILED_PREDICTION_MHZ,
                }
            })
            .collect();
        DVector::from_vec(rows)
    }

    fn loss(&self, u: &DVector<f64>) -> (f64, Vec<Option<NormalModes>>, Vec<Option<Branch>>) {
        let pred = self.predict(u);
        let assign = self.assign(&pred);
        let r = self.residuals(&pred, &assign);
        (r.norm_squared(), pred, assign)
    }

    /// Central-difference Jacobian of the residuals at fixed assignment.
    fn jacobian(&self, u: &DVector<f64>, assign: &[Option<Branch>]) -> DMatrix<f64> {
        let m = self.fit_mask.iter().filter(|&&f| f).count();
        let cols: Vec<DVector<f64>> = (0..self.free.len())
            .into_par_iter()
            .map(|k| {
                let h = 1e-6 * u[k].abs().max(1e-3);
                let mut up = u.clone();
                let mut dn = u.clone();
                up[k] += h;
                dn[k] -= h;
                let rp = self.residuals(&self.predict(&up), assign);
                let rm = self.residuals(&self.predict(&dn), assign);
                (rp - rm) / (2.0 * h)
            })
            .collect();
        DMatrix::from_fn(m, self.free.len(), |i, k| cols[k][i])
    }

    fn clamp(&self, u: &mut DVector<f64>) {
        for k in 0..u.len() {
            u[k] = u[k].clamp(self.lower[k], self.upper[k]);
        }
    }
}

fn rms(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v * v;
        n += 1;
    }
    (n > 0).then(|| (s / n as f64).sqrt())
}

/// Damped least-squares fit of circuit parameters to observed branch points.
///
/// Each point is compared with whichever predicted branch is nearer at the
/// current parameters; the assignment is redone after every accepted step.
/// Steps are accepted only if they lower the loss, and the damping adapts in
/// Marquardt fashion. Optimization runs on variables scaled by each
/// parameter's start value and projected onto the bounds.
pub fn fit_parameters(peaks: &PeakSet, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let data = peaks.in_band(cfg.band_hz);
    let n = data.len();
    let fit_mask: Vec<bool> = (0..n)
        .map(|i| cfg.holdout_stride.is_none_or(|s| i % s != s - 1))
        .collect();
    let n_fit = fit_mask.iter().filter(|&&f| f).count();
    let free = cfg.free_parameters();
    if n_fit < 10 {
        return Err(Error::InsufficientData(format!("{n_fit} fit points in band, need at least 10")));
    }
    if n_fit < 3 * free.len() {
        return Err(Error::InsufficientData(format!(
            "{n_fit} fit points for {} free parameters, need three per parameter",
            free.len()
        )));
    }
    let scale: Vec<f64> = free
        .iter()
        .map(|&p| cfg.value_of(p).abs().max(p.typical() * 1e-3))
        .collect();
    let prob = Problem {
        peaks: &data.peaks,
        fit_mask,
        base: cfg.initial,
        base_cal: cfg.calibration,
        lower: free.iter().zip(&scale).map(|(&p, s)| cfg.bounds_of(p).lower / s).collect(),
        upper: free.iter().zip(&scale).map(|(&p, s)| cfg.bounds_of(p).upper / s).collect(),
        free: free.clone(),
        scale,
        local_leak: cfg.local_leak,
    };
    let mut u = DVector::from_iterator(free.len(), free.iter().zip(&prob.scale).map(|(&p, s)| cfg.value_of(p) / s));
    let (mut loss, mut pred, mut assign) = prob.loss(&u);
    let mut history = vec![loss];
    let mut status = if free.is_empty() { FitStatus::NothingToFit } else { FitStatus::MaxIterations };
    let mut iterations = 0;
    let mut lambda = 1e-3;
    while !free.is_empty() && iterations < cfg.max_iterations {
        iterations += 1;
        let j = prob.jacobian(&u, &assign);
        let r = prob.residuals(&pred, &assign);
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let diag_floor = jtj.diagonal().max() * 1e-12;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(diag_floor);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = &u + step;
            prob.clamp(&mut trial);
            let (l_new, p_new, a_new) = prob.loss(&trial);
            if l_new < loss {
                let decrease = (loss - l_new) / loss.max(f64::MIN_POSITIVE);
                u = trial;
                loss = l_new;
                pred = p_new;
                assign = a_new;
                history.push(loss);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if decrease < cfg.loss_tolerance {
                    status = FitStatus::Converged;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no damping lowers the loss: the start of this iteration is a minimum to numerical precision
            status = if grad.amax() <= 1e-8 * (1.0 + loss) {
                FitStatus::Converged
            } else {
                FitStatus::Stalled
            };
            break;
        }
        if status == FitStatus::Converged || loss == 0.0 {
            status = FitStatus::Converged;
            break;
        }
    }
    let (singular_values, condition_number) = if free.is_empty() {
        (Vec::new(), 1.0)
    } else {
        let j = prob.jacobian(&u, &assign);
        let sv: Vec<f64> = j.svd(false, false).singular_values.iter().copied().collect();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        (sv, if min > 0.0 { max / min } else { f64::INFINITY })
    };
    let rank_deficient = condition_number > CONDITION_WARNING;
    if rank_deficient {
        log::warn!("Jacobian condition number {condition_number:.2e}: parameters are degenerate along some direction");
    }
    let (params, calibration) = prob.unpack(&u);
    let residuals: Vec<PointResidual> = data
        .peaks
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let predicted_hz = match (pred[i], assign[i]) {
                (Some(m), Some(Branch::Plus)) => m.plus,
                (Some(m), Some(Branch::Minus)) => m.minus,
                _ => f64::NAN,
            };
            PointResidual {
                bias: p.bias,
                frequency_hz: p.frequency_hz,
                branch: assign[i],
                predicted_hz,
                residual_hz: predicted_hz - p.frequency_hz,
                holdout: !prob.fit_mask[i],
            }
        })
        .collect();
    let rms_hz = rms(residuals.iter().filter(|r| !r.holdout).map(|r| r.residual_hz)).unwrap_or(f64::NAN);
    let holdout_rms_hz = rms(residuals.iter().filter(|r| r.holdout).map(|r| r.residual_hz));
    Ok(FitResult {
        params,
        calibration,
        free,
        rms_hz,
        holdout_rms_hz,
        residuals,
        status,
        iterations,
        loss_history: history,
        singular_values,
        condition_number,
        rank_deficient,
    })
}

/// Branch points of `params` at the given biases, both branches per bias,
/// restricted to `band_hz`.
pub fn synthetic_peaks(params: &CircuitParams, biases: &[f64], band_hz: (f64, f64)) -> PeakSet {
    let fb: Vec<FluxBias> = biases.iter().map(|&x| FluxBias::rf(x)).collect();
    let mut peaks = Vec::new();
    for (x, m) in biases.iter().zip(predict_modes(params, &fb)) {
        if let Some(m) = m {
            for w in [m.minus, m.plus] {
                peaks.push(Peak {
                    bias: *x,
                    frequency_hz: hertz(w),
                    weight: 1.0,
                });
            }
        }
    }
    PeakSet::new(peaks).in_band(band_hz)
}

/// RMS distance [Hz] between the branches of two parameter sets over `biases`.
pub fn branch_rms(a: &CircuitParams, b: &CircuitParams, biases: &[f64]) -> f64 {
    let fb: Vec<FluxBias> = biases.iter().map(|&x| FluxBias::rf(x)).collect();
    let pa = predict_modes(a, &fb);
    let pb = predict_modes(b, &fb);
    rms(pa.iter().zip(&pb).flat_map(|(x, y)| match (x, y) {
        (Some(x), Some(y)) => vec![hertz(x.plus - y.plus), hertz(x.minus - y.minus)],
        _ => vec![f64::INFINITY],
    }))
    .unwrap_or(f64::NAN)
}
