//! Static coupling disorder `J_i -> J_i (1 + delta_i)` with
//! `delta_i ~ U[-eps, eps]`, and seeded ensemble averages of the fidelity.
//!
//! Realisation `r` draws from its own ChaCha20 stream: the key holds
//! `base_seed` (little endian, first 8 bytes, rest zero) and the stream id
//! is `r`. Each bond consumes one `u64`, mapped to `u = (x >> 11) * 2^-53`
//! in `[0, 1)` and then `delta = eps * (2u - 1)`. Realisations are therefore
//! independent of scheduling. The same uniforms are reused for every `eps`,
//! so sweeps over the disorder strength are paired.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{diagonalize, fidelity_at, EigenSystem};
use crate::error::{Error, Result};
use crate::inverse_eigen::CouplingSet;
use crate::spectra::PstTiming;

/// Identifier of the per-realization random stream scheme, recorded in outputs.
pub const RNG_ALGORITHM_ID: &str = "chacha20-stream/u53-v1";

/// Realisations reduced per batch; bounds memory for long time grids.
const BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderModel {
    epsilon: f64,
    n_realizations: usize,
    base_seed: u64,
    rng_algorithm_id: String,
}

impl DisorderModel {
    pub fn new(epsilon: f64, n_realizations: usize, base_seed: u64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::NegativeStrength(epsilon));
        }
        if n_realizations == 0 {
            return Err(Error::NoRealizations);
        }
        Ok(Self {
            epsilon,
            n_realizations,
            base_seed,
            rng_algorithm_id: RNG_ALGORITHM_ID.to_string(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_realizations(&self) -> usize {
        self.n_realizations
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn rng_algorithm_id(&self) -> &str {
        &self.rng_algorithm_id
    }

    /// Same seeds and realisation count at a different strength.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.n_realizations, self.base_seed)
    }

    fn check_strength(&self) -> Result<()> {
        if self.epsilon >= 1.0 {
            return Err(Error::StrengthTooLarge(self.epsilon));
        }
        Ok(())
    }
}

fn realization_rng(base_seed: u64, realization: usize) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(realization as u64);
    rng
}

/// `count` uniforms in `[-1, 1)` for one realisation.
pub fn unit_draws(base_seed: u64, realization: usize, count: usize) -> Vec<f64> {
    let mut rng = realization_rng(base_seed, realization);
    (0..count)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            2.0 * u - 1.0
        })
        .collect()
}

pub fn perturb_couplings(couplings: &CouplingSet, model: &DisorderModel, realization: usize) -> Result<CouplingSet> {
    model.check_strength()?;
    if realization >= model.n_realizations {
        return Err(Error::RealizationOutOfRange {
            index: realization,
            n_realizations: model.n_realizations,
        });
    }
    let draws = unit_draws(model.base_seed, realization, couplings.couplings().len());
    let perturbed = couplings
        .couplings()
        .iter()
        .zip(&draws)
        .map(|(j, d)| j * (1.0 + model.epsilon * d))
        .collect();
    CouplingSet::new(perturbed)
}

/// Diagonalised chain of every realisation, in realisation order.
pub fn realizations(couplings: &CouplingSet, model: &DisorderModel) -> Result<Vec<EigenSystem>> {
    model.check_strength()?;
    (0..model.n_realizations)
        .into_par_iter()
        .map(|r| {
            perturb_couplings(couplings, model, r)
                .and_then(|c| diagonalize(&c))
                .map_err(|e| e.in_realization(r))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleMetadata {
    pub base_seed: u64,
    pub rng_algorithm_id: String,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    pub std_error: Vec<f64>,
    pub realizations_used: usize,
    pub metadata: EnsembleMetadata,
}

/// Pointwise Welford accumulator, fed in realisation order.
struct RunningStats {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), x) in self.mean.iter_mut().zip(&mut self.m2).zip(sample) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    fn std_error(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

pub fn run_ensemble(couplings: &CouplingSet, model: &DisorderModel, times: &[f64]) -> Result<EnsembleResult> {
    model.check_strength()?;
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidTimeGrid("times must be non-empty and finite".into()));
    }

    let mut stats = RunningStats::new(times.len());
    let mut start = 0;
    while start < model.n_realizations {
        let end = (start + BATCH).min(model.n_realizations);
        let batch: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|r| {
                let run = || -> Result<Vec<f64>> {
                    let eig = diagonalize(&perturb_couplings(couplings, model, r)?)?;
                    Ok(fidelity_at(&eig, times)?.fidelity)
                };
                run().map_err(|e| e.in_realization(r))
            })
            .collect::<Result<_>>()?;
        for sample in &batch {
            stats.push(sample);
        }
        start = end;
    }

    Ok(EnsembleResult {
        times: times.to_vec(),
        std_error: stats.std_error(),
        mean_fidelity: stats.mean,
        realizations_used: stats.count,
        metadata: EnsembleMetadata {
            base_seed: model.base_seed,
            rng_algorithm_id: model.rng_algorithm_id.clone(),
            epsilon: model.epsilon,
        },
    })
}

/// PST timing of the unperturbed chain.
pub fn unperturbed_timing(couplings: &CouplingSet) -> Result<PstTiming> {
    diagonalize(couplings)?.pst_timing()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EchoPoint {
    /// 1-based echo number.
    pub echo: usize,
    pub time: f64,
    pub mean_fidelity: f64,
    pub std_error: f64,
}

/// Mean fidelity at the unperturbed echo times `(2i - 1) t_pst`, `i = 1..=n_echoes`.
pub fn echo_decay(couplings: &CouplingSet, model: &DisorderModel, n_echoes: usize) -> Result<Vec<EchoPoint>> {
    if n_echoes == 0 {
        return Err(Error::NoEchoes);
    }
    let timing = unperturbed_timing(couplings)?;
    let times: Vec<f64> = (1..=n_echoes).map(|i| timing.echo_time(i)).collect();
    let result = run_ensemble(couplings, model, &times)?;
    Ok((0..n_echoes)
        .map(|i| EchoPoint {
            echo: i + 1,
            time: times[i],
            mean_fidelity: result.mean_fidelity[i],
            std_error: result.std_error[i],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrengthPoint {
    pub epsilon: f64,
    pub mean_fidelity: f64,
    pub std_error: f64,
}

/// Mean fidelity at the unperturbed `t_pst`, one ensemble per strength.
pub fn fidelity_vs_strength(
    couplings: &CouplingSet,
    epsilons: &[f64],
    n_realizations: usize,
    base_seed: u64,
) -> Result<Vec<StrengthPoint>> {
    let t_pst = unperturbed_timing(couplings)?.t_pst;
    epsilons
        .iter()
        .map(|&eps| {
            let model = DisorderModel::new(eps, n_realizations, base_seed)?;
            let r = run_ensemble(couplings, &model, &[t_pst])?;
            Ok(StrengthPoint {
                epsilon: eps,
                mean_fidelity: r.mean_fidelity[0],
                std_error: r.std_error[0],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fidelity_trace;
    use crate::inverse_eigen::reconstruct_couplings;
    use crate::spectra::{generate_spectrum, Family, SpectrumSpec};

    fn quadratic(n: usize) -> CouplingSet {
        let s = generate_spectrum(&SpectrumSpec::new(n, Family::Center, 2.0, 1.0).unwrap());
        reconstruct_couplings(&s).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(matches!(
            DisorderModel::new(-0.1, 10, 0),
            Err(Error::NegativeStrength(_))
        ));
        assert!(matches!(DisorderModel::new(0.1, 0, 0), Err(Error::NoRealizations)));
        let m = DisorderModel::new(1.0, 10, 0).unwrap();
        let j = quadratic(5);
        assert!(matches!(perturb_couplings(&j, &m, 0), Err(Error::StrengthTooLarge(_))));
        let m = DisorderModel::new(0.1, 10, 0).unwrap();
        assert!(matches!(
            perturb_couplings(&j, &m, 10),
            Err(Error::RealizationOutOfRange { index: 10, .. })
        ));
    }

    #[test]
    fn zero_strength_is_identity() {
        let j = quadratic(11);
        let m = DisorderModel::new(0.0, 5, 42).unwrap();
        for r in 0..5 {
            assert_eq!(perturb_couplings(&j, &m, r).unwrap(), j);
        }
    }

    #[test]
    fn perturbation_stays_in_support() {
        let j = quadratic(31);
        for eps in [0.01, 0.2, 0.9] {
            let m = DisorderModel::new(eps, 50, 7).unwrap();
            for r in 0..50 {
                let p = perturb_couplings(&j, &m, r).unwrap();
                for (a, b) in p.couplings().iter().zip(j.couplings()) {
                    assert!((a / b - 1.0).abs() <= eps * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn deterministic_and_stream_separated() {
        let j = quadratic(15);
        let m = DisorderModel::new(0.1, 3, 99).unwrap();
        let a = perturb_couplings(&j, &m, 1).unwrap();
        let b = perturb_couplings(&j, &m, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, perturb_couplings(&j, &m, 2).unwrap());
        let other = DisorderModel::new(0.1, 3, 100).unwrap();
        assert_ne!(a, perturb_couplings(&j, &other, 1).unwrap());
    }

    #[test]
    fn draws_are_mirror_independent() {
        let d = unit_draws(5, 0, 30);
        assert!((0..15).any(|i| d[i] != d[29 - i]));
        assert!(d.iter().all(|x| (-1.0..1.0).contains(x)));
    }

    #[test]
    fn zero_strength_ensemble_matches_trace() {
        let j = quadratic(15);
        let eig = diagonalize(&j).unwrap();
        let tr = fidelity_trace(&eig, 0.0, 10.0, 101).unwrap();
        let m = DisorderModel::new(0.0, 7, 3).unwrap();
        let r = run_ensemble(&j, &m, &tr.times).unwrap();
        assert_eq!(r.mean_fidelity, tr.fidelity);
        assert!(r.std_error.iter().all(|s| *s == 0.0));
        assert_eq!(r.realizations_used, 7);
        assert_eq!(r.metadata.rng_algorithm_id, RNG_ALGORITHM_ID);
    }

    #[test]
    fn ensemble_is_reproducible() {
        let j = quadratic(15);
        let m = DisorderModel::new(0.05, 130, 11).unwrap();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 3.0).collect();
        let a = run_ensemble(&j, &m, &times).unwrap();
        let b = run_ensemble(&j, &m, &times).unwrap();
        assert_eq!(a, b);
        for ((m, s), _) in a.mean_fidelity.iter().zip(&a.std_error).zip(&times) {
            assert!(*m >= 0.5 - 3.0 * s && *m <= 1.0 + 3.0 * s);
        }
    }

    #[test]
    fn welford_matches_two_pass() {
        let samples = [vec![1.0, 2.0], vec![2.0, 2.5], vec![4.0, 0.5], vec![0.5, 1.0]];
        let mut st = RunningStats::new(2);
        for s in &samples {
            st.push(s);
        }
        for c in 0..2 {
            let xs: Vec<f64> = samples.iter().map(|s| s[c]).collect();
            let mean = xs.iter().sum::<f64>() / 4.0;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
            assert!((st.mean[c] - mean).abs() < 1e-15);
            assert!((st.std_error()[c] - (var / 4.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn first_echo_matches_ensemble_at_t_pst() {
        let j = quadratic(11);
        let m = DisorderModel::new(0.05, 20, 1).unwrap();
        let echoes = echo_decay(&j, &m, 3).unwrap();
        let t = unperturbed_timing(&j).unwrap().t_pst;
        let r = run_ensemble(&j, &m, &[t]).unwrap();
        assert_eq!(echoes[0].mean_fidelity, r.mean_fidelity[0]);
        assert_eq!(echoes[0].time, t);
        assert_eq!(echoes[2].time, 5.0 * t);

        let clean = DisorderModel::new(0.0, 4, 1).unwrap();
        for p in echo_decay(&j, &clean, 5).unwrap() {
            assert!((p.mean_fidelity - 1.0).abs() < 1e-9);
        }
        assert!(matches!(echo_decay(&j, &m, 0), Err(Error::NoEchoes)));
    }

    #[test]
    fn strength_sweep_starts_at_one() {
        let j = quadratic(11);
        let pts = fidelity_vs_strength(&j, &[0.0, 0.1], 20, 4).unwrap();
        assert!((pts[0].mean_fidelity - 1.0).abs() < 1e-9);
        assert!(pts[1].mean_fidelity < pts[0].mean_fidelity);
    }

    #[test]
    fn perturbed_spectra_keep_zero_mode_and_mirror_symmetry() {
        let j = quadratic(31);
        let m = DisorderModel::new(0.3, 200, 8).unwrap();
        for eig in realizations(&j, &m).unwrap() {
            let w = eig.eigenvalues();
            let scale = eig.omega_max();
            assert!(w[15].abs() < 1e-12 * scale);
            for k in 0..31 {
                assert!((w[k] + w[30 - k]).abs() < 1e-10 * scale);
            }
        }
    }
}
