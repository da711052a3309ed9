//! Serializable model descriptions and their discretizations.

use serde::{Deserialize, Serialize};

use super::builders::{
    build_arcsine_kernel, build_halfline_kernel, build_irf_kernel, build_langevin_kernel, build_unit_interval_kernel,
    gaussian_q_kernel, AffineMap, IrfModel, NoiseSpec, Potential,
};
use super::gibbs::{build_gibbs_pair, GibbsModel, GibbsPair, GibbsParams};
use super::KernelMatrix;
use crate::error::{Error, Result};
use crate::measures::{discretize_density, DiscreteMeasure, DomainTag, Grid, WeightFunction};

/// Base measure of the unit-interval mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixtureBase {
    Uniform,
    /// Beta(a, b) density.
    Beta { a: f64, b: f64 },
}

/// Lyapunov function family for models on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineWeight {
    /// 1/2 + |x|^p.
    Polynomial { p: f64 },
    /// (1/2) e^{δ|x|}.
    Exponential { delta: f64 },
}

impl LineWeight {
    pub fn build(&self, grid: &Grid) -> Result<WeightFunction> {
        match *self {
            LineWeight::Polynomial { p } => WeightFunction::polynomial(grid, p),
            LineWeight::Exponential { delta } => WeightFunction::exponential(grid, delta, 0.5),
        }
    }
}

macro_rules! defaults {
    ($($name:ident: $t:ty = $v:expr;)*) => { $(fn $name() -> $t { $v })* };
}

defaults! {
    n200: usize = 200;
    n241: usize = 241;
    n50: usize = 50;
    iota_arcsine: f64 = 0.25;
    iota_halfline: f64 = 0.3;
    q_sd: f64 = 0.15;
    base_uniform: MixtureBase = MixtureBase::Uniform;
    half: f64 = 0.5;
    one: f64 = 1.0;
    x_min: f64 = 1e-4;
    x_max: f64 = 8.0;
    irf_lo: f64 = -8.0;
    irf_hi: f64 = 8.0;
    lang_lo: f64 = -6.0;
    lang_hi: f64 = 6.0;
    gibbs_lo: f64 = -5.0;
    gibbs_hi: f64 = 5.0;
    step: f64 = 0.1;
    quadratic: Potential = Potential::Quadratic { a: 1.0 };
    poly2: LineWeight = LineWeight::Polynomial { p: 2.0 };
    irf_map: AffineMap = AffineMap::Affine { a: 0.5, b: 0.0 };
    irf_noise: NoiseSpec = NoiseSpec::Gaussian { sd: 1.0, atoms: 201, width: 8.0 };
}

/// A model family with its parameters. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Two-piece uniform chain on (0,1) with W_ι(x) = x^{−ι} + (1−x)^{−ι}.
    Arcsine {
        #[serde(default = "n200")]
        n: usize,
        #[serde(default = "iota_arcsine")]
        iota: f64,
    },
    /// P(x,·) = x Q(x,·) + (1−x) ν with Q a truncated Gaussian. With
    /// `disjoint`, Q is uniform on (1/2,1) and ν uniform on (0,1/2).
    UnitIntervalMixture {
        #[serde(default = "n200")]
        n: usize,
        #[serde(default = "q_sd")]
        q_sd: f64,
        #[serde(default = "base_uniform")]
        base: MixtureBase,
        #[serde(default)]
        disjoint: bool,
        #[serde(default = "iota_arcsine")]
        iota: f64,
    },
    /// Half-line chain with W(x) = x^{−ι} + x.
    HalfLine {
        #[serde(default = "n200")]
        n: usize,
        #[serde(default = "half")]
        delta: f64,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "iota_halfline")]
        iota: f64,
        #[serde(default = "x_min")]
        x_min: f64,
        #[serde(default = "x_max")]
        x_max: f64,
    },
    /// x ↦ F(x) + Z on a truncated line.
    Irf {
        #[serde(default = "n200")]
        n: usize,
        #[serde(default = "irf_map")]
        map: AffineMap,
        #[serde(default = "irf_noise")]
        noise: NoiseSpec,
        #[serde(default = "irf_lo")]
        lo: f64,
        #[serde(default = "irf_hi")]
        hi: f64,
        #[serde(default = "poly2")]
        weight: LineWeight,
    },
    /// Euler step of dX = −γU'(X)dt + σ dB.
    Langevin {
        #[serde(default = "n241")]
        n: usize,
        #[serde(default = "quadratic")]
        potential: Potential,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "step")]
        h: f64,
        #[serde(default = "lang_lo")]
        lo: f64,
        #[serde(default = "lang_hi")]
        hi: f64,
        #[serde(default = "poly2")]
        weight: LineWeight,
    },
    /// Two-block Gibbs sampler P = KL with quadratic potentials.
    Gibbs {
        #[serde(default = "n50")]
        n: usize,
        #[serde(default = "gibbs_lo")]
        lo: f64,
        #[serde(default = "gibbs_hi")]
        hi: f64,
        #[serde(default)]
        params: GibbsParams,
    },
}

/// A discretized model ready for certification.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub tag: String,
    pub grid: Grid,
    pub kernel: KernelMatrix,
    pub weight: WeightFunction,
    /// Drift rate predicted by the continuum analysis, when known.
    pub predicted_epsilon: Option<f64>,
    /// Time step for Euler schemes.
    pub step: Option<f64>,
    pub gibbs: Option<(GibbsModel, GibbsPair)>,
}

impl ModelSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelSpec::Arcsine { .. } => "arcsine",
            ModelSpec::UnitIntervalMixture { .. } => "unit_interval_mixture",
            ModelSpec::HalfLine { .. } => "half_line",
            ModelSpec::Irf { .. } => "irf",
            ModelSpec::Langevin { .. } => "langevin",
            ModelSpec::Gibbs { .. } => "gibbs",
        }
    }

    /// Default instance of every model family.
    pub fn catalog() -> Vec<ModelSpec> {
        ["arcsine", "unit_interval_mixture", "half_line", "irf", "langevin", "gibbs"]
            .iter()
            .map(|t| serde_json::from_value(serde_json::json!({ "model": t })).expect("defaults are complete"))
            .collect()
    }

    pub fn build(&self) -> Result<BuiltModel> {
        match self {
            ModelSpec::Arcsine { n, iota } => {
                check_iota(*iota, 0.5)?;
                let grid = Grid::build(DomainTag::OpenInterval { a: 0.0, b: 1.0 }, *n)?;
                let kernel = build_arcsine_kernel(&grid)?;
                let weight = WeightFunction::boundary_power(&grid, *iota)?;
                Ok(BuiltModel {
                    tag: self.tag().into(),
                    predicted_epsilon: Some(1.0 / (2.0 * (1.0 - iota))),
                    grid,
                    kernel,
                    weight,
                    step: None,
                    gibbs: None,
                })
            }
            ModelSpec::UnitIntervalMixture { n, q_sd, base, disjoint, iota } => {
                check_iota(*iota, 1.0)?;
                let grid = Grid::build(DomainTag::OpenInterval { a: 0.0, b: 1.0 }, *n)?;
                let (q, nu) = if *disjoint {
                    let upper = discretize_density(|x| if x[0] > 0.5 { 1.0 } else { 0.0 }, &grid)?;
                    let lower = discretize_density(|x| if x[0] < 0.5 { 1.0 } else { 0.0 }, &grid)?;
                    (KernelMatrix::constant_rows(&upper), lower)
                } else {
                    let nu = match *base {
                        MixtureBase::Uniform => DiscreteMeasure::uniform(*n),
                        MixtureBase::Beta { a, b } => {
                            discretize_density(|x| x[0].powf(a - 1.0) * (1.0 - x[0]).powf(b - 1.0), &grid)?
                        }
                    };
                    (gaussian_q_kernel(&grid, *q_sd)?, nu)
                };
                let kernel = build_unit_interval_kernel(&q, &nu, &grid)?;
                let weight = WeightFunction::boundary_power(&grid, *iota)?;
                Ok(BuiltModel { tag: self.tag().into(), grid, kernel, weight, predicted_epsilon: None, step: None, gibbs: None })
            }
            ModelSpec::HalfLine { n, delta, gamma, iota, x_min, x_max } => {
                check_iota(*iota, 1.0)?;
                let grid = Grid::build(DomainTag::HalfLineTruncated { x_min: *x_min, x_max: *x_max }, *n)?;
                let kernel = build_halfline_kernel(*delta, *gamma, &grid)?;
                let weight = WeightFunction::half_line(&grid, *iota)?;
                Ok(BuiltModel {
                    tag: self.tag().into(),
                    predicted_epsilon: Some(0.5 * delta * (1.0 + 1.0 / (1.0 - iota))),
                    grid,
                    kernel,
                    weight,
                    step: None,
                    gibbs: None,
                })
            }
            ModelSpec::Irf { n, map, noise, lo, hi, weight } => {
                let grid = Grid::build(DomainTag::OpenInterval { a: *lo, b: *hi }, *n)?;
                let model = IrfModel { map: map.clone(), noise: noise.clone() };
                let kernel = build_irf_kernel(&model, &grid)?;
                let weight = weight.build(&grid)?;
                Ok(BuiltModel { tag: self.tag().into(), grid, kernel, weight, predicted_epsilon: None, step: None, gibbs: None })
            }
            ModelSpec::Langevin { n, potential, gamma, sigma, h, lo, hi, weight } => {
                let grid = Grid::build(DomainTag::OpenInterval { a: *lo, b: *hi }, *n)?;
                let kernel = build_langevin_kernel(potential, *gamma, *sigma, *h, &grid)?;
                let weight = weight.build(&grid)?;
                Ok(BuiltModel {
                    tag: self.tag().into(),
                    grid,
                    kernel,
                    weight,
                    predicted_epsilon: None,
                    step: Some(*h),
                    gibbs: None,
                })
            }
            ModelSpec::Gibbs { n, lo, hi, params } => {
                let grid = Grid::build(DomainTag::OpenInterval { a: *lo, b: *hi }, *n)?;
                let model = GibbsModel::quadratic(&grid, params)?;
                let pair = build_gibbs_pair(&model)?;
                let kernel = pair.product()?;
                let weight = pair.v.clone();
                Ok(BuiltModel {
                    tag: self.tag().into(),
                    grid,
                    kernel,
                    weight,
                    predicted_epsilon: None,
                    step: None,
                    gibbs: Some((model, pair)),
                })
            }
        }
    }
}

fn check_iota(iota: f64, upper: f64) -> Result<()> {
    if iota > 0.0 && iota < upper {
        Ok(())
    } else {
        Err(Error::Config(format!("iota {iota} must lie in (0, {upper})")))
    }
}
