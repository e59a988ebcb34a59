use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("number of sites must be odd, got {0}")]
    EvenSiteCount(usize),
    #[error("number of sites must be at least {min}, got {got}")]
    TooFewSites { got: usize, min: usize },
    #[error("spectrum exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("spectrum amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("spectrum is not strictly increasing at index {index}")]
    NotStrictlyIncreasing { index: usize },
    #[error("spectrum is not antisymmetric at index {index} (omega_k + omega_(N+1-k) = {residual:e})")]
    NotAntisymmetric { index: usize, residual: f64 },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("degenerate gaps: minimum gap {min_gap:e} is below {tolerance:e} x maximum gap {max_gap:e}")]
    DegenerateGaps { min_gap: f64, max_gap: f64, tolerance: f64 },
    #[error("spectrum gaps are not odd multiples of a common base; no perfect state transfer")]
    NotCommensurate,
    #[error("repeated eigenvalue at index {index}; spectral weights diverge")]
    RepeatedEigenvalue { index: usize },
    #[error("inverse eigenvalue recursion broke down at site {site} (coefficient {value:e})")]
    ReconstructionUnstable { site: usize, value: f64 },
    #[error("recursion produced non-zero diagonal {value:e} at site {site}")]
    NonZeroDiagonal { site: usize, value: f64 },
    #[error("reconstructed couplings are not mirror symmetric (asymmetry {asymmetry:e})")]
    NotMirrorSymmetric { asymmetry: f64 },
    #[error("coupling {index} must be positive and finite, got {value}")]
    NonPositiveCoupling { index: usize, value: f64 },
    #[error("tridiagonal eigensolver did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },
    #[error("transfer amplitude {0} outside [0, 1]")]
    AmplitudeOutOfRange(f64),
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("disorder strength must be non-negative, got {0}")]
    NegativeStrength(f64),
    #[error("disorder strength {0} >= 1 could flip coupling signs")]
    StrengthTooLarge(f64),
    #[error("number of realizations must be at least 1")]
    NoRealizations,
    #[error("realization index {index} out of range (n_realizations = {n_realizations})")]
    RealizationOutOfRange { index: usize, n_realizations: usize },
    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("number of echoes must be at least 1")]
    NoEchoes,
    #[error("threshold must lie in (0.5, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("fidelity maximum {peak} is below threshold {threshold}")]
    NoWindow { peak: f64, threshold: f64 },
    #[error("window above threshold {threshold} runs off the edge of the trace")]
    WindowTruncated { threshold: f64 },
    #[error("no fidelity maximum above {threshold} in trace")]
    NoEcho { threshold: f64 },
}

impl Error {
    /// Errors caused by the input configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::EvenSiteCount(_)
            | Error::TooFewSites { .. }
            | Error::NonPositiveExponent(_)
            | Error::NonPositiveAmplitude(_)
            | Error::NonFinite { .. }
            | Error::InvalidTimeGrid(_)
            | Error::NegativeStrength(_)
            | Error::StrengthTooLarge(_)
            | Error::NoRealizations
            | Error::RealizationOutOfRange { .. }
            | Error::NoEchoes
            | Error::InvalidThreshold(_) => true,
            Error::Realization { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn in_realization(self, index: usize) -> Error {
        Error::Realization {
            index,
            source: Box::new(self),
        }
    }
}
