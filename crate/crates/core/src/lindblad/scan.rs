use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{signal_magnitude, DriveConfig, Signal};
use crate::circuit::{eigenmodes, mode_coefficients, rwa_modes, CircuitParams, FluxBias, ModeCoefficients, NormalModes};
use crate::error::{Error, Result};
use crate::fock::Coupling;
use crate::units::{angular, hertz};

/// Port signal magnitude over (bias, probe frequency).
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    /// Bias axis, usually `phi_ex` [rad].
    pub bias: Vec<f64>,
    /// Coupling at each bias [rad/s].
    pub g_r: Vec<f64>,
    pub probe_hz: Vec<f64>,
    /// `amplitude[(i, j)]` at `bias[i]`, `probe_hz[j]`; arbitrary units.
    pub amplitude: DMatrix<f64>,
    pub signal: Signal,
    pub eta: f64,
    /// Mode frequencies at each bias [rad/s].
    pub branches: Vec<NormalModes>,
}

fn strictly_monotone(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] > w[0]) || x.windows(2).all(|w| w[1] < w[0])
}

impl SpectrumGrid {
    pub fn validate(&self) -> Result<()> {
        let (nb, np) = self.amplitude.shape();
        if nb != self.bias.len() || np != self.probe_hz.len() || nb != self.g_r.len() || nb != self.branches.len() {
            return Err(Error::invalid("grid", "axis lengths do not match the amplitude matrix"));
        }
        if !strictly_monotone(&self.bias) || !strictly_monotone(&self.probe_hz) {
            return Err(Error::invalid("grid", "axes must be strictly monotone"));
        }
        if self.amplitude.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::invalid("grid", "amplitudes must be finite and non-negative"));
        }
        Ok(())
    }

    /// Amplitudes divided by the grid maximum.
    pub fn normalized(&self) -> Self {
        let max = self.amplitude.max();
        let mut out = self.clone();
        if max > 0.0 {
            out.amplitude /= max;
        }
        out
    }

    /// Centered boxcar average along the probe axis over `window_hz`.
    pub fn moving_average(&self, window_hz: f64) -> Self {
        let half = 0.5 * window_hz.abs();
        let f = &self.probe_hz;
        let mut out = self.clone();
        let mut lo = 0;
        let mut hi = 0;
        let n = f.len();
        let ascending = n < 2 || f[1] > f[0];
        let order: Vec<usize> = if ascending { (0..n).collect() } else { (0..n).rev().collect() };
        for &j in &order {
            while (f[order[lo]] - f[j]).abs() > half && f[order[lo]] < f[j] {
                lo += 1;
            }
            while hi + 1 < n && (f[order[hi + 1]] - f[j]).abs() <= half {
                hi += 1;
            }
            let idx = &order[lo..=hi.max(lo)];
            for i in 0..self.bias.len() {
                out.amplitude[(i, j)] =
                    idx.iter().map(|&k| self.amplitude[(i, k)]).sum::<f64>() / idx.len() as f64;
            }
        }
        out
    }

    /// Probe point closest to `freq_hz`.
    pub fn nearest_probe(&self, freq_hz: f64) -> usize {
        (0..self.probe_hz.len())
            .min_by(|&a, &b| (self.probe_hz[a] - freq_hz).abs().total_cmp(&(self.probe_hz[b] - freq_hz).abs()))
            .unwrap_or(0)
    }
}

/// Scans `signal` over precomputed coefficients.
pub fn scan_coefficients(
    bias: Vec<f64>,
    coefficients: &[ModeCoefficients],
    probe_hz: &[f64],
    drive: &DriveConfig,
    signal: Signal,
    coupling: Coupling,
) -> Result<SpectrumGrid> {
    drive.validate()?;
    if bias.len() != coefficients.len() || bias.is_empty() || probe_hz.is_empty() {
        return Err(Error::invalid("grid", "need one coefficient set per bias and a non-empty probe axis"));
    }
    let rows: Vec<Vec<f64>> = coefficients
        .par_iter()
        .map(|c| {
            probe_hz
                .iter()
                .map(|&f| signal_magnitude(c, &drive.with_probe(angular(f)), signal, coupling))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let branches = coefficients
        .iter()
        .map(|c| match coupling {
            Coupling::Rwa => Ok(rwa_modes(c)),
            Coupling::Full => eigenmodes(c),
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = SpectrumGrid {
        g_r: coefficients.iter().map(|c| c.g_r).collect(),
        amplitude: DMatrix::from_fn(bias.len(), probe_hz.len(), |i, j| rows[i][j]),
        bias,
        probe_hz: probe_hz.to_vec(),
        signal,
        eta: drive.eta,
        branches,
    };
    grid.validate()?;
    Ok(grid)
}

/// Scans `signal` over flux biases, recomputing the circuit coefficients at
/// every bias. The bias axis of the result is `phi_ex`.
pub fn scan_spectrum(
    params: &CircuitParams,
    biases: &[FluxBias],
    probe_hz: &[f64],
    drive: &DriveConfig,
    signal: Signal,
) -> Result<SpectrumGrid> {
    let coefficients = biases
        .par_iter()
        .map(|b| mode_coefficients(params, *b).map(|r| r.coefficients()))
        .collect::<Result<Vec<_>>>()?;
    scan_coefficients(
        biases.iter().map(|b| b.phi_ex).collect(),
        &coefficients,
        probe_hz,
        drive,
        signal,
        Coupling::Rwa,
    )
}

/// Bias in `[lo, hi]` where the coupling changes sign.
pub fn zero_coupling_bias(params: &CircuitParams, lo: f64, hi: f64) -> Result<f64> {
    let g = |phi: f64| mode_coefficients(params, FluxBias::rf(phi)).map(|r| r.network.coefficients.g_r);
    let (mut lo, mut hi) = (lo, hi);
    let mut g_lo = g(lo)?;
    if g_lo.signum() == g(hi)?.signum() {
        return Err(Error::invalid("bias range", "coupling does not change sign"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Symmetric bias window `phi0 +- half` on which `|g_r|` reaches `g_abs` at
/// the wider side. `phi0` is usually a [`zero_coupling_bias`].
pub fn coupling_window(params: &CircuitParams, phi0: f64, g_abs: f64) -> Result<(f64, f64)> {
    if !(g_abs > 0.0) {
        return Err(Error::invalid("coupling window", "target coupling must be positive"));
    }
    let g = |phi: f64| mode_coefficients(params, FluxBias::rf(phi)).map(|r| r.network.coefficients.g_r.abs());
    let mut half = 0.0f64;
    for sign in [1.0, -1.0] {
        let (mut lo, mut hi) = (0.0, 1e-4);
        while g(phi0 + sign * hi)? < g_abs {
            lo = hi;
            hi *= 1.5;
            if hi > std::f64::consts::PI {
                return Err(Error::invalid("coupling window", "coupling never reaches the target"));
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(phi0 + sign * mid)? < g_abs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        half = half.max(0.5 * (lo + hi));
    }
    Ok((phi0 - half, phi0 + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisappearanceOptions {
    /// Probe points used on each side of a branch.
    pub points_per_side: usize,
    /// Largest fraction of the branch separation searched around a branch.
    pub separation_fraction: f64,
    /// A dip is a strength minimum below this fraction of the branch maximum.
    pub dip_ratio: f64,
}

impl Default for DisappearanceOptions {
    fn default() -> Self {
        Self {
            points_per_side: 2,
            separation_fraction: 0.45,
            dip_ratio: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disappearance {
    pub branch: Branch,
    /// Interpolated bias of the minimum.
    pub bias: f64,
    /// Coupling at that bias [rad/s].
    pub g_r: f64,
    /// Minimum strength over the branch maximum.
    pub depth: f64,
}

/// Strength of one branch per bias: `max amp * |f - f_branch|` over the
/// nearest probe points. The linewidth is usually far below the probe step,
/// so the sampled lineshape is the pole tail and this product recovers its
/// residue independently of where the grid points fall.
pub fn branch_strength(grid: &SpectrumGrid, branch: Branch, opts: &DisappearanceOptions) -> Vec<f64> {
    let f = &grid.probe_hz;
    let (fmin, fmax) = (f.iter().cloned().fold(f64::INFINITY, f64::min), f.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    (0..grid.bias.len())
        .map(|i| {
            let m = grid.branches[i];
            let (fb, fo) = match branch {
                Branch::Plus => (hertz(m.plus), hertz(m.minus)),
                Branch::Minus => (hertz(m.minus), hertz(m.plus)),
            };
            if !(fb >= fmin && fb <= fmax) {
                return f64::NAN;
            }
            let reach = opts.separation_fraction * (fb - fo).abs();
            let mut below: Vec<usize> = (0..f.len()).filter(|&j| f[j] <= fb && fb - f[j] <= reach).collect();
            let mut above: Vec<usize> = (0..f.len()).filter(|&j| f[j] > fb && f[j] - fb <= reach).collect();
            below.sort_by(|&a, &b| (fb - f[a]).total_cmp(&(fb - f[b])));
            above.sort_by(|&a, &b| (f[a] - fb).total_cmp(&(f[b] - fb)));
            below
                .iter()
                .take(opts.points_per_side)
                .chain(above.iter().take(opts.points_per_side))
                .map(|&j| grid.amplitude[(i, j)] * (f[j] - fb).abs())
                .fold(f64::NAN, f64::max)
        })
        .collect()
}

/// Biases where a mode branch loses its signal.
///
/// Each branch is tracked through its predicted frequency. The strength
/// minimum is refined by treating the strength as `|s|` of a quantity that
/// changes sign linearly through the dip.
pub fn find_disappearance(grid: &SpectrumGrid, opts: &DisappearanceOptions) -> Result<Vec<Disappearance>> {
    grid.validate()?;
    let mut out = Vec::new();
    for branch in [Branch::Plus, Branch::Minus] {
        let s = branch_strength(grid, branch, opts);
        let valid: Vec<usize> = (0..s.len()).filter(|&i| s[i].is_finite()).collect();
        if valid.len() < 3 {
            log::warn!("{branch:?} branch not resolved on the probe axis");
            continue;
        }
        let max = valid.iter().map(|&i| s[i]).fold(0.0, f64::max);
        let m = *valid.iter().min_by(|&&a, &&b| s[a].total_cmp(&s[b])).unwrap();
        let depth = if max > 0.0 { s[m] / max } else { 1.0 };
        if depth >= opts.dip_ratio {
            continue;
        }
        let left = (m > 0 && s[m - 1].is_finite()).then(|| m - 1);
        let right = (m + 1 < s.len() && s[m + 1].is_finite()).then(|| m + 1);
        let partner = match (left, right) {
            (Some(l), Some(r)) => Some(if s[l] < s[r] { l } else { r }),
            (l, r) => l.or(r),
        };
        let (bias, g_r) = match partner {
            Some(k) => {
                let t = s[m] / (s[m] + s[k]);
                (
                    grid.bias[m] + t * (grid.bias[k] - grid.bias[m]),
                    grid.g_r[m] + t * (grid.g_r[k] - grid.g_r[m]),
                )
            }
            None => (grid.bias[m], grid.g_r[m]),
        };
        out.push(Disappearance { branch, bias, g_r, depth });
    }
    Ok(out)
}
