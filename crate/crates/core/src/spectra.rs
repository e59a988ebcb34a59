//! Energy spectra that support perfect state transfer.
//!
//! A mirror-symmetric chain transfers an excitation perfectly from site 1 to
//! site N at time `t_pst` iff every gap between consecutive eigenvalues is an
//! odd multiple of `pi / t_pst`. This module generates the two power-law
//! spectrum families, snaps arbitrary antisymmetric spectra onto that lattice
//! and extracts the transfer time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that a gap is an odd multiple of the base.
pub const GAP_TOLERANCE: f64 = 1e-9;
/// Default resolution of the commensuration base scan, relative to the smallest gap.
pub const BASE_SEARCH_TOLERANCE: f64 = 1e-4;
/// Largest odd divisor of the smallest gap tried by [`pst_time`].
const MAX_BASE_DIVISOR: u64 = 1001;
/// Antisymmetry tolerance, relative to the largest magnitude.
const ANTISYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Reference index at the spectrum centre: `sgn(x) |x|^alpha`.
    Center,
    /// Reference index at the spectrum edge: `-sgn(x) [(k0 - |x|)^alpha - k0^alpha]`.
    Boundary,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Center => f.write_str("center"),
            Family::Boundary => f.write_str("boundary"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    n_sites: usize,
    family: Family,
    exponent: f64,
    amplitude: f64,
}

impl SpectrumSpec {
    pub fn new(n_sites: usize, family: Family, exponent: f64, amplitude: f64) -> Result<Self> {
        if n_sites < 3 {
            return Err(Error::TooFewSites { got: n_sites, min: 3 });
        }
        if n_sites.is_multiple_of(2) {
            return Err(Error::EvenSiteCount(n_sites));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::NonPositiveExponent(exponent));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::NonPositiveAmplitude(amplitude));
        }
        Ok(Self {
            n_sites,
            family,
            exponent,
            amplitude,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// 1-based index of the zero eigenvalue.
    pub fn center_index(&self) -> usize {
        self.n_sites.div_ceil(2)
    }
}

/// Strictly increasing, antisymmetric list of eigenfrequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Validates ordering and antisymmetry, then removes the residual
    /// asymmetry so that `omega_k == -omega_{N+1-k}` holds bitwise.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewSites { got: 0, min: 1 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(index) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NotStrictlyIncreasing { index: index + 1 });
        }
        let n = values.len();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut sym = values.clone();
        for k in 0..n {
            let residual = values[k] + values[n - 1 - k];
            if residual.abs() > ANTISYMMETRY_TOLERANCE * scale {
                return Err(Error::NotAntisymmetric { index: k, residual });
            }
            sym[k] = 0.5 * (values[k] - values[n - 1 - k]);
        }
        Ok(Self(sym))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.0.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Multiplies every value by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        assert!(factor > 0.0, "scale factor must be positive");
        Spectrum(self.0.iter().map(|v| v * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Spectrum::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PstTiming {
    pub t_pst: f64,
    /// Odd integers `2 m_k + 1`, one per gap.
    pub odd_multipliers: Vec<u64>,
}

impl PstTiming {
    /// Common gap base `pi / t_pst`.
    pub fn base(&self) -> f64 {
        PI / self.t_pst
    }

    /// Arrival time of the `i`-th echo, `(2i - 1) t_pst` (1-based).
    pub fn echo_time(&self, i: usize) -> f64 {
        assert!(i >= 1, "echoes are numbered from 1");
        (2 * i - 1) as f64 * self.t_pst
    }
}

/// Result of [`commensurate_adjust`].
#[derive(Debug, Clone, PartialEq)]
pub struct Commensurated {
    pub spectrum: Spectrum,
    pub timing: PstTiming,
    /// `max_k |omega_k' - omega_k| / max_k |omega_k|`.
    pub max_relative_change: f64,
}

pub fn generate_spectrum(spec: &SpectrumSpec) -> Spectrum {
    let n = spec.n_sites;
    let k0 = spec.center_index();
    let alpha = spec.exponent;
    let amp = spec.amplitude;
    let edge = k0 as f64;

    let mut values = vec![0.0; n];
    // x = k - k0 > 0 on the upper half; the lower half is mirrored exactly.
    for x in 1..=(n - k0) {
        let xf = x as f64;
        let v = match spec.family {
            Family::Center => amp * xf.powf(alpha),
            Family::Boundary => -amp * ((edge - xf).powf(alpha) - edge.powf(alpha)),
        };
        values[k0 - 1 + x] = v;
        values[k0 - 1 - x] = -v;
    }
    Spectrum(values)
}

/// Nearest odd integer to `r`, rounding ties up; never below 1.
fn nearest_odd(r: f64) -> u64 {
    let m = ((r - 1.0) / 2.0 + 0.5).floor();
    if m < 0.0 {
        1
    } else {
        2 * (m as u64) + 1
    }
}

/// Finds the largest base such that every gap is an odd multiple of it
/// within `tolerance` (relative per gap) and returns `t_pst = pi / base`.
pub fn pst_time(spectrum: &Spectrum, tolerance: f64) -> Result<PstTiming> {
    let gaps = spectrum.gaps();
    if gaps.is_empty() {
        return Err(Error::TooFewSites { got: 1, min: 2 });
    }
    let g_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);

    let mut q = 1u64;
    while q <= MAX_BASE_DIVISOR {
        let base = g_min / q as f64;
        let multipliers: Vec<u64> = gaps.iter().map(|g| nearest_odd(g / base)).collect();
        let fits = gaps
            .iter()
            .zip(&multipliers)
            .all(|(g, &m)| (g - m as f64 * base).abs() <= tolerance * g);
        if fits {
            // Least-squares base over all gaps.
            let num: f64 = gaps.iter().zip(&multipliers).map(|(g, &m)| g * m as f64).sum();
            let den: f64 = multipliers.iter().map(|&m| (m * m) as f64).sum();
            let base = num / den;
            return Ok(PstTiming {
                t_pst: PI / base,
                odd_multipliers: multipliers,
            });
        }
        q += 2;
    }
    Err(Error::NotCommensurate)
}

/// Rebuilds an antisymmetric spectrum from the centre outward with gaps
/// `multipliers[k] * base`.
fn rebuild(multipliers: &[u64], base: f64) -> Vec<f64> {
    let n = multipliers.len() + 1;
    let mut values = vec![0.0; n];
    let half = n / 2;
    let start = if n % 2 == 1 {
        half + 1
    } else {
        values[half] = 0.5 * multipliers[half - 1] as f64 * base;
        half + 1
    };
    for k in start..n {
        values[k] = values[k - 1] + multipliers[k - 1] as f64 * base;
    }
    for k in 0..half {
        values[k] = -values[n - 1 - k];
    }
    values
}

/// Minimally moves an antisymmetric spectrum onto the commensurability
/// lattice.
///
/// Spectra that already pass [`pst_time`] only have their gaps snapped.
/// Otherwise the base is scanned over `[g_min/3, g_min]` in steps of
/// `base_search_tolerance * g_min`. At each candidate every gap is rounded
/// to the nearest odd multiple, and the summed squared relative gap
/// deviation is scored. The best base wins, with ties going to the larger base.
pub fn commensurate_adjust(spectrum: &Spectrum, base_search_tolerance: f64) -> Result<Commensurated> {
    let gaps = spectrum.gaps();
    if gaps.is_empty() {
        return Err(Error::TooFewSites { got: 1, min: 2 });
    }
    let g_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let g_max = gaps.iter().copied().fold(0.0f64, f64::max);
    if g_min < base_search_tolerance * g_max {
        return Err(Error::DegenerateGaps {
            min_gap: g_min,
            max_gap: g_max,
            tolerance: base_search_tolerance,
        });
    }

    let (multipliers, base) = match pst_time(spectrum, GAP_TOLERANCE) {
        Ok(timing) => (timing.odd_multipliers.clone(), timing.base()),
        Err(_) => scan_base(&gaps, g_min, base_search_tolerance),
    };

    let adjusted = Spectrum::new(rebuild(&multipliers, base))?;
    let timing = pst_time(&adjusted, GAP_TOLERANCE)?;
    let scale = spectrum.max_abs();
    let max_relative_change = spectrum
        .values()
        .iter()
        .zip(adjusted.values())
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);

    Ok(Commensurated {
        spectrum: adjusted,
        timing,
        max_relative_change,
    })
}

fn scan_base(gaps: &[f64], g_min: f64, resolution: f64) -> (Vec<u64>, f64) {
    let lo = g_min / 3.0;
    let step = resolution * g_min;
    let steps = ((g_min - lo) / step).floor() as usize;

    let mut best: Option<(f64, f64)> = None;
    for j in 0..=steps + 1 {
        let base = (lo + j as f64 * step).min(g_min);
        let score: f64 = gaps
            .iter()
            .map(|g| {
                let m = nearest_odd(g / base) as f64;
                let dev = (g - m * base) / g;
                dev * dev
            })
            .sum();
        if best.is_none_or(|(s, _)| score <= s) {
            best = Some((score, base));
        }
    }
    let (_, base) = best.expect("scan visits at least one base");
    let multipliers = gaps.iter().map(|g| nearest_odd(g / base)).collect();
    (multipliers, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(n: usize, family: Family, alpha: f64) -> SpectrumSpec {
        SpectrumSpec::new(n, family, alpha, 1.0).unwrap()
    }

    #[test]
    fn rejects_invalid_specs() {
        assert_eq!(
            SpectrumSpec::new(4, Family::Center, 1.0, 1.0),
            Err(Error::EvenSiteCount(4))
        );
        assert!(matches!(
            SpectrumSpec::new(1, Family::Center, 1.0, 1.0),
            Err(Error::TooFewSites { .. })
        ));
        assert_eq!(
            SpectrumSpec::new(5, Family::Center, 0.0, 1.0),
            Err(Error::NonPositiveExponent(0.0))
        );
        assert_eq!(
            SpectrumSpec::new(5, Family::Boundary, -1.0, 1.0),
            Err(Error::NonPositiveExponent(-1.0))
        );
    }

    #[test]
    fn small_spectra() {
        let s = generate_spectrum(&spec(5, Family::Center, 1.0));
        assert_eq!(s.values(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let s = generate_spectrum(&spec(5, Family::Center, 2.0));
        assert_eq!(s.values(), &[-4.0, -1.0, 0.0, 1.0, 4.0]);
    }

    #[test]
    fn boundary_quadratic_n5() {
        // -sgn(x) [(3 - |x|)^2 - 9] evaluated at x = k - 3.
        let oracle: Vec<f64> = (1..=5i32)
            .map(|k| {
                let x = k - 3;
                let v = (3 - x.abs()).pow(2) - 9;
                -(x.signum() * v) as f64
            })
            .collect();
        assert_eq!(oracle, vec![-8.0, -5.0, 0.0, 5.0, 8.0]);
        let s = generate_spectrum(&spec(5, Family::Boundary, 2.0));
        assert_eq!(s.values(), oracle.as_slice());
    }

    #[test]
    fn spectrum_validation() {
        assert!(matches!(
            Spectrum::new(vec![-1.0, 1.0, 0.5]),
            Err(Error::NotStrictlyIncreasing { index: 2 })
        ));
        assert!(matches!(
            Spectrum::new(vec![-1.0, 0.0, 2.0]),
            Err(Error::NotAntisymmetric { .. })
        ));
        assert!(Spectrum::new(vec![-1.0, 1.0]).is_ok());
    }

    #[test]
    fn density_ordering() {
        let c = generate_spectrum(&spec(31, Family::Center, 2.0)).gaps();
        assert!(c[15] < c[29]);
        let b = generate_spectrum(&spec(31, Family::Boundary, 2.0)).gaps();
        assert!(b[29] < b[15]);
    }

    #[test]
    fn pst_time_equidistant_scaled_by_pi() {
        let s = Spectrum::new(vec![-2.0 * PI, -PI, 0.0, PI, 2.0 * PI]).unwrap();
        let t = pst_time(&s, GAP_TOLERANCE).unwrap();
        assert_relative_eq!(t.t_pst, 1.0, epsilon = 1e-15);
        assert_eq!(t.odd_multipliers, vec![1, 1, 1, 1]);
    }

    /// Exhaustive search: every base of the form gap / odd, keep the largest
    /// base that divides every gap into an odd multiple.
    fn brute_force_base(gaps: &[f64]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for g in gaps {
            for q in (1..200u64).step_by(2) {
                let base = g / q as f64;
                let ok = gaps.iter().all(|h| {
                    let r = h / base;
                    let m = r.round();
                    (r - m).abs() < 1e-9 && (m as i64) % 2 == 1
                });
                if ok && best.is_none_or(|b| base > b) {
                    best = Some(base);
                }
            }
        }
        best
    }

    #[test]
    fn pst_time_boundary_quadratic_matches_exhaustive_search() {
        let s = Spectrum::new(vec![-8.0, -5.0, 0.0, 5.0, 8.0]).unwrap();
        let base = brute_force_base(&s.gaps()).unwrap();
        assert_eq!(base, 1.0);
        let t = pst_time(&s, GAP_TOLERANCE).unwrap();
        assert_relative_eq!(t.t_pst, PI / base, epsilon = 1e-15);
        assert_eq!(t.odd_multipliers, vec![3, 5, 5, 3]);
    }

    #[test]
    fn pst_time_rejects_even_ratio() {
        let s = Spectrum::new(vec![-2.5, -1.0, 0.0, 1.0, 2.5]).unwrap();
        assert_eq!(pst_time(&s, GAP_TOLERANCE), Err(Error::NotCommensurate));
        assert_eq!(brute_force_base(&s.gaps()), None);
    }

    #[test]
    fn pst_time_extracts_common_odd_factor() {
        // gaps 3, 9, 9, 3 share factor 3: base 3, multipliers 1, 3, 3, 1.
        let s = Spectrum::new(vec![-12.0, -9.0, 0.0, 9.0, 12.0]).unwrap();
        let t = pst_time(&s, GAP_TOLERANCE).unwrap();
        assert_eq!(t.odd_multipliers, vec![1, 3, 3, 1]);
        assert_relative_eq!(t.t_pst, PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn adjust_is_identity_on_commensurate_input() {
        let s = Spectrum::new(vec![-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        let c = commensurate_adjust(&s, BASE_SEARCH_TOLERANCE).unwrap();
        assert_eq!(c.spectrum, s);
        assert_eq!(c.timing.odd_multipliers, vec![1, 1, 1, 1]);
        assert_relative_eq!(c.timing.t_pst, PI, epsilon = 1e-15);

        let s = Spectrum::new(vec![-8.0, -5.0, 0.0, 5.0, 8.0]).unwrap();
        let c = commensurate_adjust(&s, BASE_SEARCH_TOLERANCE).unwrap();
        assert_eq!(c.spectrum, s);
        assert_eq!(c.timing.odd_multipliers, vec![3, 5, 5, 3]);
        assert_eq!(c.max_relative_change, 0.0);
    }

    #[test]
    fn adjust_center_half_n31() {
        let s = generate_spectrum(&spec(31, Family::Center, 0.5));
        assert_eq!(pst_time(&s, GAP_TOLERANCE), Err(Error::NotCommensurate));
        let c = commensurate_adjust(&s, BASE_SEARCH_TOLERANCE).unwrap();
        assert!(c.max_relative_change < 0.05, "{}", c.max_relative_change);
        assert!(c.max_relative_change > 0.0);
        // Every gap is an odd multiple of pi / t_pst.
        let base = c.timing.base();
        for (g, m) in c.spectrum.gaps().iter().zip(&c.timing.odd_multipliers) {
            assert_eq!(m % 2, 1);
            assert_relative_eq!(g / base, *m as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn adjust_rejects_degenerate_gaps() {
        let s = Spectrum::new(vec![-1.0, -1e-6, 0.0, 1e-6, 1.0]).unwrap();
        assert!(matches!(
            commensurate_adjust(&s, BASE_SEARCH_TOLERANCE),
            Err(Error::DegenerateGaps { .. })
        ));
    }

    #[test]
    fn integer_exponents_need_no_adjustment() {
        for family in [Family::Center, Family::Boundary] {
            for alpha in [1.0, 2.0, 3.0] {
                for n in (5..=31).step_by(2) {
                    let s = generate_spectrum(&spec(n, family, alpha));
                    assert!(pst_time(&s, GAP_TOLERANCE).is_ok(), "{family} {alpha} {n}");
                    let c = commensurate_adjust(&s, BASE_SEARCH_TOLERANCE).unwrap();
                    assert!(c.max_relative_change < 1e-14, "{family} {alpha} {n}");
                }
            }
        }
    }

    #[test]
    fn echo_times_are_odd_multiples() {
        let t = PstTiming {
            t_pst: 2.0,
            odd_multipliers: vec![1],
        };
        assert_eq!(t.echo_time(1), 2.0);
        assert_eq!(t.echo_time(3), 10.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_spec() -> impl Strategy<Value = SpectrumSpec> {
            (
                1usize..20,
                prop_oneof![Just(Family::Center), Just(Family::Boundary)],
                0.2f64..3.0,
                0.1f64..10.0,
            )
                .prop_map(|(h, f, a, amp)| SpectrumSpec::new(2 * h + 1, f, a, amp).unwrap())
        }

        proptest! {
            #[test]
            fn generated_spectra_are_antisymmetric(spec in any_spec()) {
                let s = generate_spectrum(&spec);
                let v = s.values();
                let n = v.len();
                for k in 0..n {
                    prop_assert_eq!(v[k], -v[n - 1 - k]);
                }
                prop_assert_eq!(v[n / 2], 0.0);
                prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
            }

            #[test]
            fn adjust_is_idempotent_and_commensurate(spec in any_spec()) {
                let s = generate_spectrum(&spec);
                let once = commensurate_adjust(&s, BASE_SEARCH_TOLERANCE).unwrap();
                prop_assert!(pst_time(&once.spectrum, GAP_TOLERANCE).is_ok());
                let twice = commensurate_adjust(&once.spectrum, BASE_SEARCH_TOLERANCE).unwrap();
                prop_assert_eq!(&twice.timing.odd_multipliers, &once.timing.odd_multipliers);
                let scale = once.spectrum.max_abs();
                for (a, b) in once.spectrum.values().iter().zip(twice.spectrum.values()) {
                    prop_assert!((a - b).abs() <= 1e-13 * scale);
                }
            }
        }
    }
}
