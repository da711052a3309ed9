//! Spec parsing shared by the subcommands and the experiment config.

use std::path::Path;

use kantorovich::{DiscreteMeasure, Grid, WeightFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Reads a spec given as inline JSON, a path to a JSON file, or a bare tag.
/// A bare tag `t` is read as `{tag_key: t}`.
pub fn parse_spec<T: DeserializeOwned>(text: &str, tag_key: &str) -> CliResult<T> {
    let t = text.trim();
    let value: serde_json::Value = if t.starts_with('{') {
        serde_json::from_str(t).map_err(|e| CliError::Config(format!("invalid JSON spec: {e}")))?
    } else if Path::new(t).is_file() {
        read_json(Path::new(t))?
    } else {
        serde_json::json!({ tag_key: t })
    };
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid spec `{t}`: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Lyapunov weight used for φ_V, drift and the V-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// The weight shipped with the model.
    #[default]
    Model,
    /// (x−a)^{−ι} + (b−x)^{−ι} on an open interval.
    BoundaryPower { iota: f64 },
    /// x^{−ι} + x on the half-line.
    HalfLine { iota: f64 },
    /// 1/2 + |x|^p.
    Polynomial { p: f64 },
    /// scale·exp(δ|x|).
    Exponential {
        delta: f64,
        #[serde(default = "half")]
        scale: f64,
    },
    Constant { value: f64 },
}

fn half() -> f64 {
    0.5
}

impl WeightSpec {
    /// Builds the weight on `grid`; `Model` resolves to `model_weight`.
    pub fn build(&self, grid: &Grid, model_weight: Option<&WeightFunction>) -> CliResult<WeightFunction> {
        let w = match *self {
            WeightSpec::Model => {
                return model_weight
                    .cloned()
                    .ok_or_else(|| CliError::Config("weight `model` needs a model; pass an explicit weight".into()))
            }
            WeightSpec::BoundaryPower { iota } => WeightFunction::boundary_power(grid, iota),
            WeightSpec::HalfLine { iota } => WeightFunction::half_line(grid, iota),
            WeightSpec::Polynomial { p } => WeightFunction::polynomial(grid, p),
            WeightSpec::Exponential { delta, scale } => WeightFunction::exponential(grid, delta, scale),
            WeightSpec::Constant { value } => WeightFunction::constant(grid.len(), value),
        };
        Ok(w?)
    }
}

/// Initial pair (μ1, μ2) for decay curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartSpec {
    /// Diracs at the grid points with indices ⌊a·n⌋ and ⌊b·n⌋.
    Diracs { a: f64, b: f64 },
    /// Two random measures drawn from ChaCha8 seeded with the run seed.
    Random,
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Diracs { a: 0.2, b: 0.8 }
    }
}

impl StartSpec {
    pub fn validate(&self) -> CliResult<()> {
        match *self {
            StartSpec::Diracs { a, b } if !((0.0..1.0).contains(&a) && (0.0..1.0).contains(&b)) => {
                Err(CliError::Config(format!("dirac fractions {a}, {b} must lie in [0,1)")))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, n: usize, seed: u64) -> (DiscreteMeasure, DiscreteMeasure) {
        match *self {
            StartSpec::Diracs { a, b } => {
                let idx = |f: f64| ((f * n as f64).floor() as usize).min(n - 1);
                (DiscreteMeasure::dirac(n, idx(a)), DiscreteMeasure::dirac(n, idx(b)))
            }
            StartSpec::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (DiscreteMeasure::random(n, &mut rng), DiscreteMeasure::random(n, &mut rng))
            }
        }
    }
}

/// Geometric r-grid `lo:hi:points` on the rescaled weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RSweep {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl RSweep {
    pub fn validate(&self) -> CliResult<()> {
        if self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite() && self.points >= 1 {
            Ok(())
        } else {
            Err(CliError::Config(format!("invalid r-sweep {}:{}:{}", self.lo, self.hi, self.points)))
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        kantorovich::contraction::geometric_r_grid(self.lo, self.hi, self.points)
    }
}

impl std::str::FromStr for RSweep {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("r-sweep `{s}` is not lo:hi:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let sweep = RSweep {
            lo: parts[0].parse().map_err(|_| bad())?,
            hi: parts[1].parse().map_err(|_| bad())?,
            points: parts[2].parse().map_err(|_| bad())?,
        };
        sweep.validate()?;
        Ok(sweep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kantorovich::semidistance::CostSpec;

    #[test]
    fn bare_tags_and_inline_json() {
        let c: CostSpec = parse_spec("phi0", "label").unwrap();
        assert_eq!(c, CostSpec::Phi0);
        let c: CostSpec = parse_spec(r#"{"label":"phiRho","params":{"rho":0.1}}"#, "label").unwrap();
        assert_eq!(c, CostSpec::PhiRho { rho: 0.1 });
        let w: WeightSpec = parse_spec("model", "kind").unwrap();
        assert_eq!(w, WeightSpec::Model);
        assert!(parse_spec::<CostSpec>("nonsense", "label").is_err());
    }

    #[test]
    fn r_sweep_parsing() {
        let s: RSweep = "2:8:4".parse().unwrap();
        assert_eq!(s.levels().len(), 4);
        assert!("2:1:4".parse::<RSweep>().is_err());
        assert!("2:8".parse::<RSweep>().is_err());
    }

    #[test]
    fn dirac_start_indices() {
        let (a, b) = StartSpec::default().build(10, 0);
        assert_eq!(a.weights()[2], 1.0);
        assert_eq!(b.weights()[8], 1.0);
    }
}
