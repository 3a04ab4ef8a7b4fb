//! JSON run configuration. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entanglement::SpectrumSource;
use crate::families::FamilySpec;
use crate::numerics::C64;
use crate::teleport::{BranchMode, OutcomeSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Family,
    Teleport,
    Spectrum,
    Symmetry,
    Sweep,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<CommandKind>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub protocol: Option<ProtocolConfig>,
    /// Cuts for `spectrum`; all bulk cuts when empty.
    #[serde(default)]
    pub cuts: Vec<usize>,
    #[serde(default)]
    pub sources: Option<Vec<SpectrumSourceName>>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub max_n: Option<usize>,
    #[serde(default)]
    pub branches: Option<BranchSpec>,
    /// Append the dense amplitudes to the `family` report.
    #[serde(default)]
    pub dense_dump: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
        Self::from_json(&text)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub angles: Vec<f64>,
    /// Forced outcome list or `{"seed": u64}`; seeded from the run seed when
    /// absent.
    #[serde(default)]
    pub outcomes: Option<OutcomeSource>,
    #[serde(default)]
    pub feedforward: bool,
}

/// `spectrum` sources by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSourceName {
    ClosedForm,
    Covariance,
    Dense,
}

impl From<SpectrumSourceName> for SpectrumSource {
    fn from(s: SpectrumSourceName) -> Self {
        match s {
            SpectrumSourceName::ClosedForm => Self::ClosedForm,
            SpectrumSourceName::Covariance => Self::Covariance,
            SpectrumSourceName::Dense => Self::Dense,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Spectrum,
    Symmetry,
}

/// Cut used at each sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum CutRule {
    Fixed(usize),
    Named(NamedCut),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCut {
    Half,
}

impl CutRule {
    pub fn at(self, n: usize) -> usize {
        match self {
            Self::Fixed(c) => c,
            Self::Named(NamedCut::Half) => n / 2,
        }
    }
}

/// Cartesian grid over chain length and a uniform angle.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub n: Vec<usize>,
    pub theta: Vec<f64>,
    #[serde(default = "default_cut")]
    pub ell: CutRule,
    #[serde(default)]
    pub source: Option<SpectrumSourceName>,
    /// `(a_L, b_L)`; `(1, 0)` for spectrum sweeps and `(1, 1)` for symmetry
    /// sweeps by default.
    #[serde(default)]
    pub left: Option<[C64; 2]>,
    /// `(a_R, b_R)`; defaults as for `left`, with symmetry sweeps choosing
    /// the balanced output boundary.
    #[serde(default)]
    pub right: Option<[C64; 2]>,
}

fn default_cut() -> CutRule {
    CutRule::Named(NamedCut::Half)
}

/// `exhaustive` or `sample:K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchSpec {
    Exhaustive,
    Sample(usize),
}

impl BranchSpec {
    pub fn mode(self, seed: u64) -> BranchMode {
        match self {
            Self::Exhaustive => BranchMode::Exhaustive,
            Self::Sample(count) => BranchMode::Sample { count, seed },
        }
    }
}

impl FromStr for BranchSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "exhaustive" => Ok(Self::Exhaustive),
            Some(("sample", k)) => k
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .map(Self::Sample)
                .ok_or_else(|| format!("bad sample count in `{s}`")),
            _ => Err(format!("expected `exhaustive` or `sample:K`, got `{s}`")),
        }
    }
}

impl<'de> Deserialize<'de> for BranchSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
