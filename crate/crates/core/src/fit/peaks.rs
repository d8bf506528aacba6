use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::lindblad::SpectrumGrid;

/// Default instrument band [Hz].
pub const DEFAULT_BAND_HZ: (f64, f64) = (4e9, 8e9);

/// One observed branch point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Bias coordinate; `phi_ex` [rad] unless a flux calibration maps it.
    pub bias: f64,
    pub frequency_hz: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn new(peaks: Vec<Peak>) -> Self {
        Self { peaks }
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// Drops peaks outside `[lo, hi]` Hz.
    pub fn in_band(&self, band: (f64, f64)) -> Self {
        Self::new(
            self.peaks
                .iter()
                .filter(|p| p.frequency_hz >= band.0 && p.frequency_hz <= band.1)
                .copied()
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    /// Threshold in robust standard deviations above the column median.
    pub k: f64,
    pub band_hz: (f64, f64),
    pub max_per_column: usize,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            k: 5.0,
            band_hz: DEFAULT_BAND_HZ,
            max_per_column: 2,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Noise floor `median + k * 1.4826 * MAD` of one column.
pub fn noise_floor(column: &[f64], k: f64) -> f64 {
    let mut v = column.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = column.iter().map(|x| (x - med).abs()).collect();
    med + k * 1.4826 * median(&mut dev)
}

/// Peaks of one column over an ascending frequency axis.
pub fn column_peaks(freq: &[f64], column: &[f64], opts: &PeakOptions) -> Vec<(f64, f64)> {
    let n = column.len();
    if n < 3 {
        return Vec::new();
    }
    let floor = noise_floor(column, opts.k);
    let mut found: Vec<(f64, f64)> = (1..n - 1)
        .filter(|&j| column[j] > floor && column[j] > column[j - 1] && column[j] >= column[j + 1])
        .filter_map(|j| {
            let (y0, y1, y2) = (column[j - 1], column[j], column[j + 1]);
            let curv = y0 - 2.0 * y1 + y2;
            let shift = if curv < 0.0 { (0.5 * (y0 - y2) / curv).clamp(-0.5, 0.5) } else { 0.0 };
            let f = freq[j] + shift * (freq[j + 1] - freq[j - 1]) / 2.0;
            (f >= opts.band_hz.0 && f <= opts.band_hz.1).then_some((f, y1))
        })
        .collect();
    found.sort_by(|a, b| b.1.total_cmp(&a.1));
    found.truncate(opts.max_per_column);
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found
}

/// Up to `max_per_column` peaks per bias column of a spectrum grid.
pub fn extract_peaks(grid: &SpectrumGrid, opts: &PeakOptions) -> PeakSet {
    extract_peaks_from(&grid.bias, &grid.probe_hz, &grid.amplitude, opts)
}

/// As [`extract_peaks`] for a bare table; `amplitude[(i, j)]` at `bias[i]`, `probe_hz[j]`.
pub fn extract_peaks_from(bias: &[f64], probe_hz: &[f64], amplitude: &DMatrix<f64>, opts: &PeakOptions) -> PeakSet {
    let mut order: Vec<usize> = (0..probe_hz.len()).collect();
    order.sort_by(|&a, &b| probe_hz[a].total_cmp(&probe_hz[b]));
    let freq: Vec<f64> = order.iter().map(|&j| probe_hz[j]).collect();
    let mut peaks = Vec::new();
    let mut empty = 0;
    for i in 0..bias.len() {
        let column: Vec<f64> = order.iter().map(|&j| amplitude[(i, j)]).collect();
        let found = column_peaks(&freq, &column, opts);
        if found.is_empty() {
            empty += 1;
        }
        peaks.extend(found.into_iter().map(|(f, _)| Peak {
            bias: bias[i],
            frequency_hz: f,
            weight: 1.0,
        }));
    }
    if empty > 0 {
        log::warn!("{empty} of {} bias columns have no peak above the noise floor", bias.len());
    }
    PeakSet::new(peaks)
}
