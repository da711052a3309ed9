use std::path::{Path, PathBuf};

use kantorovich::certify::{default_eps_grid, DriftObjective};
use kantorovich::kernels::ModelSpec;
use kantorovich::semidistance::CostSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::specs::{read_json, RSweep, StartSpec, WeightSpec};

/// A (ψ, φ) pair whose coefficient β_{ψ,φ}(P) is reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostPair {
    pub psi: CostSpec,
    pub phi: CostSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default = "default_costs")]
    pub costs: Vec<CostPair>,
    /// Cost for the measured decay curve.
    #[serde(default = "phi_v")]
    pub decay_cost: CostSpec,
    /// Levels on the rescaled weight. Defaults to 25 points from just above
    /// max(r_ε, r₀) to twice the largest pair level.
    #[serde(default)]
    pub r_sweep: Option<RSweep>,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    #[serde(default)]
    pub drift_objective: DriftObjective,
    #[serde(default = "half")]
    pub iota: f64,
    #[serde(default = "thirty")]
    pub horizon: usize,
    #[serde(default)]
    pub start: StartSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_costs() -> Vec<CostPair> {
    vec![CostPair { psi: CostSpec::Phi0, phi: CostSpec::Phi0 }, CostPair { psi: CostSpec::PhiV, phi: CostSpec::PhiV }]
}

fn phi_v() -> CostSpec {
    CostSpec::PhiV
}

fn half() -> f64 {
    0.5
}

fn thirty() -> usize {
    30
}

/// Smallest horizon accepted by the decay fit.
pub const MIN_HORIZON: usize = 5;

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let cfg: ExperimentConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad(format!("eps_grid must be non-empty with entries in (0,1), got {:?}", self.eps_grid));
        }
        if !(0.5..1.0).contains(&self.iota) {
            return bad(format!("iota {} not in [1/2,1)", self.iota));
        }
        if self.horizon < MIN_HORIZON {
            return bad(format!("horizon {} below {MIN_HORIZON}", self.horizon));
        }
        if let Some(s) = &self.r_sweep {
            s.validate()?;
        }
        self.start.validate()
    }
}
