//! End-to-end channel design: spectrum family -> commensurate spectrum ->
//! coupling pattern, normalised so that `J_max = 1`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{diagonalize, EigenSystem};
use crate::error::{Error, Result};
use crate::inverse_eigen::{reconstruct_couplings, verify_reconstruction, CouplingSet};
use crate::spectra::{
    commensurate_adjust, generate_spectrum, Family, PstTiming, Spectrum, SpectrumSpec, BASE_SEARCH_TOLERANCE,
};

/// The five reference channels used throughout the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedFamily {
    /// Centre family, `alpha = 1`.
    Linear,
    /// Centre family, `alpha = 2`.
    Quadratic,
    /// Boundary family, `alpha = 1/2`.
    BoundaryHalf,
    /// Centre family, `alpha = 1/2`.
    CenterHalf,
    /// Boundary family, `alpha = 2`.
    BoundaryQuadratic,
}

impl NamedFamily {
    pub const ALL: [NamedFamily; 5] = [
        NamedFamily::Linear,
        NamedFamily::Quadratic,
        NamedFamily::BoundaryHalf,
        NamedFamily::CenterHalf,
        NamedFamily::BoundaryQuadratic,
    ];

    pub fn family(self) -> Family {
        match self {
            NamedFamily::Linear | NamedFamily::Quadratic | NamedFamily::CenterHalf => Family::Center,
            NamedFamily::BoundaryHalf | NamedFamily::BoundaryQuadratic => Family::Boundary,
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            NamedFamily::Linear => 1.0,
            NamedFamily::Quadratic | NamedFamily::BoundaryQuadratic => 2.0,
            NamedFamily::BoundaryHalf | NamedFamily::CenterHalf => 0.5,
        }
    }

    pub fn spec(self, n_sites: usize) -> Result<SpectrumSpec> {
        SpectrumSpec::new(n_sites, self.family(), self.exponent(), 1.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedFamily::Linear => "linear",
            NamedFamily::Quadratic => "quadratic",
            NamedFamily::BoundaryHalf => "boundary-half",
            NamedFamily::CenterHalf => "center-half",
            NamedFamily::BoundaryQuadratic => "boundary-quadratic",
        }
    }
}

impl fmt::Display for NamedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        NamedFamily::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = NamedFamily::ALL.iter().map(|f| f.name()).collect();
            format!("unknown family `{s}`; expected one of {}", names.join(", "))
        })
    }
}

/// A designed chain in units where the strongest coupling is 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PstChannel {
    pub spectrum: Spectrum,
    pub couplings: CouplingSet,
    pub timing: PstTiming,
    /// Largest coupling before normalisation (amplitude 1 spectrum).
    pub raw_j_max: f64,
    /// Largest relative change made by commensuration, in raw units.
    pub max_relative_change: f64,
    /// Forward eigenvalue residual relative to `omega_max`.
    pub residual: f64,
}

impl PstChannel {
    pub fn n_sites(&self) -> usize {
        self.couplings.n_sites()
    }

    pub fn eigensystem(&self) -> Result<EigenSystem> {
        diagonalize(&self.couplings)
    }
}

pub fn design_channel(spec: &SpectrumSpec) -> Result<PstChannel> {
    let adjusted = commensurate_adjust(&generate_spectrum(spec), BASE_SEARCH_TOLERANCE)?;
    let raw = reconstruct_couplings(&adjusted.spectrum)?;
    let raw_j_max = raw.max_coupling();
    if !(raw_j_max > 0.0 && raw_j_max.is_finite()) {
        return Err(Error::ReconstructionUnstable {
            site: 0,
            value: raw_j_max,
        });
    }
    let spectrum = adjusted.spectrum.scaled(1.0 / raw_j_max);
    let couplings = raw.scaled(1.0 / raw_j_max);
    let residual = verify_reconstruction(&couplings, &spectrum);
    let timing = PstTiming {
        t_pst: adjusted.timing.t_pst * raw_j_max,
        odd_multipliers: adjusted.timing.odd_multipliers,
    };
    Ok(PstChannel {
        spectrum,
        couplings,
        timing,
        raw_j_max,
        max_relative_change: adjusted.max_relative_change,
        residual,
    })
}

pub fn design_named(family: NamedFamily, n_sites: usize) -> Result<PstChannel> {
    design_channel(&family.spec(n_sites)?)
}
