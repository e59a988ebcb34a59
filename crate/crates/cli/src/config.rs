//! Run configurations. Each one doubles as a CLI argument group and as the
//! `config` object stored in output headers, so any output can be replayed.

use clap::{ArgGroup, Args, ValueEnum};
use pstchain::design::NamedFamily;
use pstchain::spectra::{Family, SpectrumSpec, BASE_SEARCH_TOLERANCE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    /// Level density highest at the band centre: omega ~ sgn(x) |x|^alpha.
    Center,
    /// Level density highest at the band edges.
    Boundary,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Center => Family::Center,
            FamilyArg::Boundary => Family::Boundary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Spectrum family.
    #[arg(long, value_enum, default_value_t = FamilyArg::Center)]
    pub family: FamilyArg,
    /// Spectrum exponent alpha (> 0).
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Number of sites N (odd, >= 3).
    #[arg(long, short = 'n', default_value_t = 31)]
    pub n: usize,
}

impl ChainSpec {
    pub fn named(family: NamedFamily, n: usize) -> Self {
        let kind = match family.family() {
            Family::Center => FamilyArg::Center,
            Family::Boundary => FamilyArg::Boundary,
        };
        Self {
            family: kind,
            alpha: family.exponent(),
            n,
        }
    }

    pub fn spectrum_spec(&self, amplitude: f64) -> pstchain::Result<SpectrumSpec> {
        SpectrumSpec::new(self.n, self.family.into(), self.alpha, amplitude)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectrumConfig {
    #[command(flatten)]
    pub chain: ChainSpec,
    /// Pre-normalisation amplitude A.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Relative step of the commensurating base scan.
    #[arg(long, default_value_t = BASE_SEARCH_TOLERANCE)]
    pub base_tolerance: f64,
    /// Rescale so that the reconstructed chain has J_max = 1.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ChainConfig {
    #[command(flatten)]
    pub chain: ChainSpec,
}

/// Time grid `[0, t_end * t_pst]`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridSpec {
    /// End of the time grid in units of t_PST.
    #[arg(long, default_value_t = 2.0)]
    pub t_end: f64,
    /// Number of grid points [default: 2000 per t_PST].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateConfig {
    #[command(flatten)]
    pub chain: ChainSpec,
    #[command(flatten)]
    pub grid: GridSpec,
    /// Fidelity threshold defining the read-out window.
    #[arg(long, default_value_t = pstchain::analysis::DEFAULT_WINDOW_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Disorder strengths eps_J, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    pub eps: Vec<f64>,
    /// Realizations per strength.
    #[arg(long, default_value_t = 100)]
    pub nav: usize,
    /// Base seed of the per-realization random streams.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("mode").args(["echoes", "at_pst"])))]
pub struct EnsembleConfig {
    #[command(flatten)]
    pub chain: ChainSpec,
    #[command(flatten)]
    pub disorder: DisorderSpec,
    #[command(flatten)]
    pub grid: GridSpec,
    /// Evaluate at the first K echo times (2i - 1) t_PST instead of a grid.
    #[arg(long)]
    pub echoes: Option<usize>,
    /// Evaluate only at t_PST (fidelity versus strength).
    #[arg(long)]
    pub at_pst: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("kind").required(true).args(["localization", "level_shifts", "window"])))]
pub struct AnalyzeConfig {
    #[command(flatten)]
    pub chain: ChainSpec,
    /// Eigenvector site probabilities P_{k,i}.
    #[arg(long)]
    pub localization: bool,
    /// Disorder-induced level shift statistics (uses --eps/--nav/--seed).
    #[arg(long)]
    pub level_shifts: bool,
    /// Read-out window: curvature, width, first maximum, speed ratio.
    #[arg(long)]
    pub window: bool,
    #[command(flatten)]
    pub disorder: DisorderSpec,
    /// Fidelity threshold defining the read-out window.
    #[arg(long, default_value_t = pstchain::analysis::DEFAULT_WINDOW_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReproduceConfig {
    /// Number of sites of every reference chain.
    #[arg(long, short = 'n', default_value_t = 31)]
    pub n: usize,
    /// Realizations per ensemble.
    #[arg(long, default_value_t = 100)]
    pub nav: usize,
    /// Realizations for level-shift statistics.
    #[arg(long, default_value_t = 1000)]
    pub nav_levels: usize,
    /// Base seed shared by every ensemble.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// A complete, replayable run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "lowercase")]
pub enum RunConfig {
    Spectrum(SpectrumConfig),
    Chain(ChainConfig),
    Simulate(SimulateConfig),
    Ensemble(EnsembleConfig),
    Analyze(AnalyzeConfig),
    Reproduce(ReproduceConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Spectrum(_) => "spectrum",
            RunConfig::Chain(_) => "chain",
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Ensemble(_) => "ensemble",
            RunConfig::Analyze(_) => "analyze",
            RunConfig::Reproduce(_) => "reproduce",
        }
    }
}
