//! Inverse eigenvalue problem for persymmetric, zero-diagonal Jacobi matrices.
//!
//! A persymmetric Jacobi matrix is fixed by its spectrum alone: the squared
//! first components of its eigenvectors are `w_k ∝ 1 / prod_{j != k} |omega_k - omega_j|`.
//! Running Lanczos on `diag(omega)` from the start vector `sqrt(w)` then
//! reproduces the matrix, with the couplings as the off-diagonal recursion
//! coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Spectrum;
use crate::tridiag;

/// Recursion coefficients below this fraction of `omega_max` count as breakdown.
const BREAKDOWN_TOLERANCE: f64 = 1e-13;
/// Largest admissible Lanczos diagonal, relative to `omega_max`.
const DIAGONAL_TOLERANCE: f64 = 1e-10;
/// Largest admissible `|J_i - J_{N-i}| / J_max` after reconstruction.
const MIRROR_TOLERANCE: f64 = 1e-9;

/// Nearest-neighbour exchange couplings `J_1 .. J_{N-1}` of a chain with zero
/// local fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CouplingSet(Vec<f64>);

impl CouplingSet {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::TooFewSites { got: 1, min: 2 });
        }
        if let Some(index) = couplings.iter().position(|j| !(*j > 0.0 && j.is_finite())) {
            return Err(Error::NonPositiveCoupling {
                index,
                value: couplings[index],
            });
        }
        Ok(Self(couplings))
    }

    pub fn couplings(&self) -> &[f64] {
        &self.0
    }

    pub fn n_sites(&self) -> usize {
        self.0.len() + 1
    }

    pub fn max_coupling(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// `max_i |J_i - J_{N-i}| / J_max`.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.0.len();
        let jmax = self.max_coupling();
        (0..n)
            .map(|i| (self.0[i] - self.0[n - 1 - i]).abs() / jmax)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> CouplingSet {
        assert!(factor > 0.0, "scale factor must be positive");
        CouplingSet(self.0.iter().map(|j| j * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for CouplingSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        CouplingSet::new(v)
    }
}

impl From<CouplingSet> for Vec<f64> {
    fn from(c: CouplingSet) -> Self {
        c.0
    }
}

/// Squared first components of the eigenvectors; positive, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights(Vec<f64>);

impl SpectralWeights {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Weights of the persymmetric Jacobi matrix with the given spectrum,
/// accumulated as sums of logarithms.
pub fn spectral_weights(spectrum: &Spectrum) -> Result<SpectralWeights> {
    let w = spectrum.values();
    let n = w.len();
    let mut log_w = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if j == k {
                continue;
            }
            let d = (w[k] - w[j]).abs();
            if d == 0.0 {
                return Err(Error::RepeatedEigenvalue { index: k.max(j) });
            }
            acc -= d.ln();
        }
        log_w[k] = acc;
    }
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    for x in &mut weights {
        *x /= total;
    }
    Ok(SpectralWeights(weights))
}

/// Reconstructs the couplings of the unique mirror-symmetric, zero-field chain
/// whose single-excitation spectrum is `spectrum`.
pub fn reconstruct_couplings(spectrum: &Spectrum) -> Result<CouplingSet> {
    let omega = spectrum.values();
    let n = omega.len();
    if n < 2 {
        return Err(Error::TooFewSites { got: n, min: 2 });
    }
    let omega_max = spectrum.max_abs();
    let weights = spectral_weights(spectrum)?;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    basis.push(weights.weights().iter().map(|w| w.sqrt()).collect());
    let mut couplings = Vec::with_capacity(n - 1);
    let mut beta_prev = 0.0;

    for j in 0..n {
        let q = &basis[j];
        let mut v: Vec<f64> = omega.iter().zip(q).map(|(o, x)| o * x).collect();
        if j > 0 {
            for (vi, pi) in v.iter_mut().zip(&basis[j - 1]) {
                *vi -= beta_prev * pi;
            }
        }
        let alpha = dot(&v, q);
        if alpha.abs() >= DIAGONAL_TOLERANCE * omega_max {
            return Err(Error::NonZeroDiagonal {
                site: j + 1,
                value: alpha,
            });
        }
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= alpha * qi;
        }
        if j == n - 1 {
            break;
        }

        // Full reorthogonalisation, two passes.
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }

        let beta = dot(&v, &v).sqrt();
        if beta.is_nan() || beta <= BREAKDOWN_TOLERANCE * omega_max {
            return Err(Error::ReconstructionUnstable {
                site: j + 1,
                value: beta,
            });
        }
        couplings.push(beta);
        beta_prev = beta;
        basis.push(v.iter().map(|x| x / beta).collect());
    }

    let set = CouplingSet::new(couplings)?;
    let asymmetry = set.mirror_asymmetry();
    if asymmetry > MIRROR_TOLERANCE {
        return Err(Error::NotMirrorSymmetric { asymmetry });
    }
    Ok(set)
}

/// `max_k |omega_k(chain) - omega_k(target)| / omega_max`, using a forward
/// diagonalisation of the chain.
pub fn verify_reconstruction(couplings: &CouplingSet, spectrum: &Spectrum) -> f64 {
    assert_eq!(couplings.n_sites(), spectrum.len(), "chain and spectrum sizes differ");
    let diag = vec![0.0; couplings.n_sites()];
    let forward = match tridiag::eigen(&diag, couplings.couplings()) {
        Ok(e) => e.values,
        Err(_) => return f64::INFINITY,
    };
    let scale = spectrum.max_abs();
    forward
        .iter()
        .zip(spectrum.values())
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{commensurate_adjust, generate_spectrum, Family, SpectrumSpec, BASE_SEARCH_TOLERANCE};
    use approx::assert_relative_eq;
    use std::f64::consts::SQRT_2;

    fn spectrum(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    /// Direct product formula, no logarithms.
    fn product_weights(w: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = (0..w.len())
            .map(|k| {
                1.0 / (0..w.len())
                    .filter(|&j| j != k)
                    .map(|j| (w[k] - w[j]).abs())
                    .product::<f64>()
            })
            .collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|r| r / s).collect()
    }

    #[test]
    fn three_site_weights() {
        let s = spectrum(&[-SQRT_2, 0.0, SQRT_2]);
        let oracle = product_weights(s.values());
        assert_relative_eq!(oracle[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(oracle[1], 0.5, epsilon = 1e-15);
        let w = spectral_weights(&s).unwrap();
        for (a, b) in w.weights().iter().zip(&oracle) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        // First components of the uniform 3-site chain eigenvectors.
        let e = tridiag::eigen(&[0.0; 3], &[1.0, 1.0]).unwrap();
        for k in 0..3 {
            assert_relative_eq!(e.vectors[k * 3].powi(2), w.weights()[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn two_site_weights() {
        let w = spectral_weights(&spectrum(&[-1.0, 1.0])).unwrap();
        assert_eq!(w.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn five_site_weights_are_symmetric() {
        let w = spectral_weights(&spectrum(&[-2.0, -1.0, 0.0, 1.0, 2.0])).unwrap();
        let w = w.weights();
        let oracle = product_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        for k in 0..5 {
            assert_relative_eq!(w[k], w[4 - k], epsilon = 1e-16);
            assert_relative_eq!(w[k], oracle[k], epsilon = 1e-15);
        }
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        // Binomial weights (1, 4, 6, 4, 1) / 16.
        assert_relative_eq!(w[0], 1.0 / 16.0, epsilon = 1e-15);
        assert_relative_eq!(w[2], 6.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn log_weights_survive_wide_spectra() {
        let s = generate_spectrum(&SpectrumSpec::new(31, Family::Boundary, 2.0, 1.0).unwrap());
        let wide = s.scaled(1e12);
        assert!(product_weights(wide.values()).iter().any(|w| !w.is_finite()));
        let reference = spectral_weights(&s).unwrap();
        let w = spectral_weights(&wide).unwrap();
        for (a, b) in w.weights().iter().zip(reference.weights()) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn small_chains() {
        let j = reconstruct_couplings(&spectrum(&[-SQRT_2, 0.0, SQRT_2])).unwrap();
        assert_relative_eq!(j.couplings()[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(j.couplings()[1], 1.0, epsilon = 1e-14);
        let j = reconstruct_couplings(&spectrum(&[-1.0, 1.0])).unwrap();
        assert_relative_eq!(j.couplings()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn linear_spectrum_gives_krawtchouk_couplings() {
        let n = 31;
        let s = generate_spectrum(&SpectrumSpec::new(n, Family::Center, 1.0, 1.0).unwrap());
        let j = reconstruct_couplings(&s).unwrap();
        // Candidate closed form, checked independently by forward diagonalisation:
        // sqrt(i (N - i)) / 2 has spacing-1 spectrum.
        let candidate = CouplingSet::new((1..n).map(|i| ((i * (n - i)) as f64).sqrt() / 2.0).collect()).unwrap();
        assert!(verify_reconstruction(&candidate, &s) < 1e-13);
        for (a, b) in j.couplings().iter().zip(candidate.couplings()) {
            assert!((a - b).abs() / b < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn verification_residuals() {
        let s = spectrum(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let j = reconstruct_couplings(&s).unwrap();
        assert!(verify_reconstruction(&j, &s) < 1e-12);

        let j = CouplingSet::new(vec![1.0, 1.0]).unwrap();
        assert!(verify_reconstruction(&j, &spectrum(&[-SQRT_2, 0.0, SQRT_2])) < 1e-15);

        let s = spectrum(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let j = reconstruct_couplings(&s).unwrap();
        let mut bent = j.couplings().to_vec();
        bent[0] *= 1.1;
        assert!(verify_reconstruction(&CouplingSet::new(bent).unwrap(), &s) > 1e-3);
    }

    #[test]
    fn rejects_non_positive_couplings() {
        assert!(matches!(
            CouplingSet::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveCoupling { index: 1, .. })
        ));
        assert!(CouplingSet::new(vec![]).is_err());
    }

    fn family_spectrum(n: usize, family: Family, alpha: f64) -> Spectrum {
        let raw = generate_spectrum(&SpectrumSpec::new(n, family, alpha, 1.0).unwrap());
        commensurate_adjust(&raw, BASE_SEARCH_TOLERANCE).unwrap().spectrum
    }

    #[test]
    fn roundtrip_and_persymmetry_for_all_families() {
        let families = [
            (Family::Center, 1.0),
            (Family::Center, 2.0),
            (Family::Boundary, 0.5),
            (Family::Center, 0.5),
            (Family::Boundary, 2.0),
        ];
        for n in [5, 15, 31] {
            for (family, alpha) in families {
                let s = family_spectrum(n, family, alpha);
                let j = reconstruct_couplings(&s).unwrap();
                assert!(verify_reconstruction(&j, &s) < 1e-9, "{family} {alpha} {n}");
                assert!(j.mirror_asymmetry() < 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_couplings_are_weaker_off_centre() {
        let lin = reconstruct_couplings(&family_spectrum(31, Family::Center, 1.0)).unwrap();
        let quad = reconstruct_couplings(&family_spectrum(31, Family::Center, 2.0)).unwrap();
        let lin = lin.scaled(1.0 / lin.max_coupling());
        let quad = quad.scaled(1.0 / quad.max_coupling());
        // Both peak at the two central bonds; elsewhere the quadratic chain is weaker.
        for i in (0..30).filter(|i| !(14..=15).contains(i)) {
            assert!(quad.couplings()[i] < lin.couplings()[i], "bond {i}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scale_equivariance(half in 1usize..16, alpha in 0.3f64..3.0, c in 0.01f64..100.0, center in any::<bool>()) {
                let family = if center { Family::Center } else { Family::Boundary };
                let s = family_spectrum(2 * half + 1, family, alpha);
                let a = reconstruct_couplings(&s).unwrap();
                let b = reconstruct_couplings(&s.scaled(c)).unwrap();
                for (x, y) in a.couplings().iter().zip(b.couplings()) {
                    prop_assert!((c * x - y).abs() <= 1e-9 * y);
                }
            }
        }
    }
}
