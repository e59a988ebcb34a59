//! Robustness diagnostics: eigenvector localisation, disorder-induced level
//! shifts, read-out window shape, first-arrival detection and speed ratios.

use std::f64::consts::PI;

use serde::Serialize;

use crate::disorder::{realizations, DisorderModel};
use crate::dynamics::{diagonalize, EigenSystem, FidelityTrace};
use crate::error::{Error, Result};
use crate::inverse_eigen::CouplingSet;

pub const DEFAULT_WINDOW_THRESHOLD: f64 = 0.99;
pub const FIRST_MAXIMUM_THRESHOLD: f64 = 0.55;

/// Ties for the global maximum closer than this resolve to the earliest sample.
const PEAK_TIE_TOLERANCE: f64 = 1e-12;

/// `p[k][i] = a_{k,i}^2`, eigenstate `k` (ascending energy), site `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationMap {
    pub p: Vec<Vec<f64>>,
}

impl LocalizationMap {
    pub fn n_sites(&self) -> usize {
        self.p.len()
    }

    /// Distribution over eigenstates of a single site.
    pub fn site_distribution(&self, site: usize) -> Vec<f64> {
        self.p.iter().map(|row| row[site]).collect()
    }

    /// `(sum_k P_{k,1}^2)^-1`: the number of eigenstates the first site effectively occupies.
    pub fn first_site_participation(&self) -> f64 {
        participation_ratio(&self.site_distribution(0))
    }
}

pub fn site_probabilities(eig: &EigenSystem) -> LocalizationMap {
    let n = eig.n_sites();
    let p = (0..n)
        .map(|k| eig.eigenvector(k).iter().map(|a| a * a).collect())
        .collect();
    LocalizationMap { p }
}

pub fn participation_ratio(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelShiftStats {
    /// RMS deviation of each sorted level from its unperturbed value.
    pub std_dev: Vec<f64>,
    /// Mean signed deviation of each sorted level.
    pub mean_shift: Vec<f64>,
    pub unperturbed: Vec<f64>,
    /// `epsilon * omega_max` of the unperturbed chain.
    pub normalization: f64,
    pub realizations_used: usize,
}

impl LevelShiftStats {
    /// `std_dev / (epsilon * omega_max)`; all zeros for a clean ensemble.
    pub fn normalized(&self) -> Vec<f64> {
        if self.normalization == 0.0 {
            return vec![0.0; self.std_dev.len()];
        }
        self.std_dev.iter().map(|s| s / self.normalization).collect()
    }
}

pub fn level_shift_stats(couplings: &CouplingSet, model: &DisorderModel) -> Result<LevelShiftStats> {
    let clean = diagonalize(couplings)?;
    let omega0 = clean.eigenvalues();
    let n = omega0.len();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let runs = realizations(couplings, model)?;
    for eig in &runs {
        for (k, w) in eig.eigenvalues().iter().enumerate() {
            let d = w - omega0[k];
            sum[k] += d;
            sum_sq[k] += d * d;
        }
    }
    let count = runs.len() as f64;
    Ok(LevelShiftStats {
        std_dev: sum_sq.iter().map(|s| (s / count).sqrt()).collect(),
        mean_shift: sum.iter().map(|s| s / count).collect(),
        unperturbed: omega0.to_vec(),
        normalization: model.epsilon() * clean.omega_max(),
        realizations_used: runs.len(),
    })
}

/// `kappa = sum_{k,s} P_{s,1} P_{k,1} (omega_k - omega_s)^2`, so that
/// `|f_N(t_pst + dt)|^2 = 1 - kappa dt^2 / 2 + O(dt^4)` for a PST chain.
pub fn window_curvature(eig: &EigenSystem) -> f64 {
    let w = eig.eigenvalues();
    let p: Vec<f64> = (0..eig.n_sites()).map(|k| eig.component(k, 0).powi(2)).collect();
    let mut kappa = 0.0;
    for k in 0..w.len() {
        for s in 0..w.len() {
            kappa += p[s] * p[k] * (w[k] - w[s]).powi(2);
        }
    }
    kappa
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.5 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

fn crossing(t0: f64, f0: f64, t1: f64, f1: f64, level: f64) -> f64 {
    t0 + (level - f0) / (f1 - f0) * (t1 - t0)
}

/// Length of the contiguous interval around the global maximum where
/// `F >= threshold`, with linearly interpolated edges.
pub fn window_width(trace: &FidelityTrace, threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    let f = &trace.fidelity;
    let t = &trace.times;
    let peak = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if f.is_empty() || peak < threshold {
        return Err(Error::NoWindow { peak, threshold });
    }
    let top = f.iter().position(|&v| v >= peak - PEAK_TIE_TOLERANCE).unwrap_or(0);

    let mut lo = top;
    while lo > 0 && f[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = top;
    while hi + 1 < f.len() && f[hi + 1] >= threshold {
        hi += 1;
    }
    if lo == 0 || hi + 1 == f.len() {
        return Err(Error::WindowTruncated { threshold });
    }
    let left = crossing(t[lo - 1], f[lo - 1], t[lo], f[lo], threshold);
    let right = crossing(t[hi], f[hi], t[hi + 1], f[hi + 1], threshold);
    Ok(right - left)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstMaximum {
    pub time: f64,
    pub fidelity: f64,
}

/// First interior grid point with `F > 0.55` that is a strict rise from the
/// left and not exceeded on the right.
pub fn detect_first_maximum(trace: &FidelityTrace) -> Result<FirstMaximum> {
    let f = &trace.fidelity;
    (1..f.len().saturating_sub(1))
        .find(|&i| f[i] > FIRST_MAXIMUM_THRESHOLD && f[i] > f[i - 1] && f[i] >= f[i + 1])
        .map(|i| FirstMaximum {
            time: trace.times[i],
            fidelity: f[i],
        })
        .ok_or(Error::NoEcho {
            threshold: FIRST_MAXIMUM_THRESHOLD,
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMetrics {
    pub curvature: f64,
    pub width: f64,
    pub threshold: f64,
    pub first_max_time: f64,
    pub first_max_fidelity: f64,
}

/// `trace` must start at `t = 0` and extend past the PST maximum.
pub fn window_metrics(eig: &EigenSystem, trace: &FidelityTrace, threshold: f64) -> Result<WindowMetrics> {
    let first = detect_first_maximum(trace)?;
    Ok(WindowMetrics {
        curvature: window_curvature(eig),
        width: window_width(trace, threshold)?,
        threshold,
        first_max_time: first.time,
        first_max_fidelity: first.fidelity,
    })
}

/// `gamma = t_pst / (pi N / (4 J_max))`.
pub fn speed_ratio(t_pst: f64, n_sites: usize, j_max: f64) -> f64 {
    t_pst * 4.0 * j_max / (PI * n_sites as f64)
}
