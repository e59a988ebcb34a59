//! Single-excitation dynamics of an XX chain.
//!
//! With total magnetisation conserved, an excitation injected at site 1
//! evolves under the N x N tridiagonal matrix with couplings `J_i` on the
//! off-diagonal. Time evolution goes through the eigendecomposition, so
//! commensurate spectra give exactly periodic traces.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse_eigen::CouplingSet;
use crate::spectra::{pst_time, PstTiming, Spectrum, GAP_TOLERANCE};
use crate::tridiag;

/// Trace resolution: grid points per `t_pst`.
pub const POINTS_PER_T_PST: usize = 2000;
/// Amplitudes this far above 1 are rounding noise and get clamped.
const AMPLITUDE_SLACK: f64 = 1e-10;

/// Eigenvalues `omega_k` ascending and amplitudes `a_{k,i} = <i|Psi_k>`
/// (row k = eigenstate, column i = site), signed so that `a_{k,1} > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn n_sites(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `a_{k,i}` with 0-based `k` and `i`.
    pub fn component(&self, k: usize, i: usize) -> f64 {
        self.vectors[k * self.n_sites() + i]
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        let n = self.n_sites();
        &self.vectors[k * n..(k + 1) * n]
    }

    pub fn omega_max(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// `max |A A^T - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n_sites();
        let mut worst = 0.0f64;
        for k in 0..n {
            for j in k..n {
                let dot: f64 = self
                    .eigenvector(k)
                    .iter()
                    .zip(self.eigenvector(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if k == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Eigenvalues as a validated antisymmetric [`Spectrum`].
    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(self.eigenvalues.clone())
    }

    /// Transfer time of the chain, from the commensurability of its spectrum.
    pub fn pst_timing(&self) -> Result<PstTiming> {
        pst_time(&self.spectrum()?, GAP_TOLERANCE)
    }

    /// `f_i(t) = <i| exp(-iHt) |1>` for every site `i`.
    pub fn site_amplitudes(&self, t: f64) -> Vec<Complex64> {
        let n = self.n_sites();
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|w| Complex64::from_polar(1.0, -w * t))
            .collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| phases[k] * (self.component(k, i) * self.component(k, 0)))
                    .sum()
            })
            .collect()
    }

    /// `a_{k,N} a_{k,1}` for every k.
    fn end_to_end_weights(&self) -> Vec<f64> {
        let last = self.n_sites() - 1;
        (0..self.n_sites())
            .map(|k| self.component(k, last) * self.component(k, 0))
            .collect()
    }
}

pub fn diagonalize(couplings: &CouplingSet) -> Result<EigenSystem> {
    let n = couplings.n_sites();
    let fields = vec![0.0; n];
    let tridiag::TridiagEigen { values, mut vectors } = tridiag::eigen(&fields, couplings.couplings())?;
    for k in 0..n {
        if vectors[k * n] < 0.0 {
            for x in &mut vectors[k * n..(k + 1) * n] {
                *x = -*x;
            }
        }
    }
    Ok(EigenSystem {
        eigenvalues: values,
        vectors,
    })
}

/// `f_N(t) = sum_k a_{k,N} a_{k,1} exp(-i omega_k t)`, with hbar = 1.
pub fn transfer_amplitude(eig: &EigenSystem, t: f64) -> Complex64 {
    amplitude_from_weights(&eig.end_to_end_weights(), eig.eigenvalues(), t)
}

fn amplitude_from_weights(weights: &[f64], omega: &[f64], t: f64) -> Complex64 {
    weights
        .iter()
        .zip(omega)
        .map(|(c, w)| Complex64::from_polar(*c, -w * t))
        .sum()
}

/// Bloch-sphere averaged fidelity with the transfer phase corrected
/// (`cos gamma = 1`): `|f|/3 + |f|^2/6 + 1/2`.
pub fn averaged_fidelity(amplitude_abs: f64) -> Result<f64> {
    if !(0.0..=1.0 + AMPLITUDE_SLACK).contains(&amplitude_abs) {
        return Err(Error::AmplitudeOutOfRange(amplitude_abs));
    }
    let a = amplitude_abs.min(1.0);
    Ok(a / 3.0 + a * a / 6.0 + 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub amplitude_abs: Vec<f64>,
    pub fidelity: Vec<f64>,
}

impl FidelityTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Uniform grid of `n_points` times from `t_start` to `t_end` inclusive.
pub fn time_grid(t_start: f64, t_end: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
        return Err(Error::InvalidTimeGrid(format!(
            "need t_start < t_end, got [{t_start}, {t_end}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidTimeGrid(format!(
            "need at least 2 points, got {n_points}"
        )));
    }
    let step = (t_end - t_start) / (n_points - 1) as f64;
    let mut times: Vec<f64> = (0..n_points).map(|j| t_start + j as f64 * step).collect();
    times[n_points - 1] = t_end;
    Ok(times)
}

/// Grid size giving [`POINTS_PER_T_PST`] points per `t_pst` over `[t_start, t_end]`.
pub fn default_points(t_start: f64, t_end: f64, t_pst: f64) -> usize {
    ((t_end - t_start) / t_pst * POINTS_PER_T_PST as f64).ceil() as usize + 1
}

pub fn fidelity_trace(eig: &EigenSystem, t_start: f64, t_end: f64, n_points: usize) -> Result<FidelityTrace> {
    let times = time_grid(t_start, t_end, n_points)?;
    fidelity_at(eig, &times)
}

/// Amplitudes and fidelities on an arbitrary list of times.
pub fn fidelity_at(eig: &EigenSystem, times: &[f64]) -> Result<FidelityTrace> {
    let weights = eig.end_to_end_weights();
    let omega = eig.eigenvalues();
    let amplitude_abs: Vec<f64> = times
        .par_iter()
        .map(|&t| amplitude_from_weights(&weights, omega, t).norm())
        .collect();
    let fidelity = amplitude_abs
        .iter()
        .map(|&a| averaged_fidelity(a))
        .collect::<Result<Vec<f64>>>()?;
    Ok(FidelityTrace {
        times: times.to_vec(),
        amplitude_abs,
        fidelity,
    })
}
