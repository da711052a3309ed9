//! Lyapunov functions for iterated random functions x ↦ F(x) + Z.

use serde::Serialize;

use super::{certify_drift_with, default_eps_grid, DriftCertificate, DriftObjective};
use crate::error::{Error, Result};
use crate::kernels::{build_irf_kernel, AffineMap, IrfModel};
use crate::measures::{Grid, WeightFunction};

/// ‖F(x) − F(x₀)‖ ≤ λ‖x − x₀‖ + c for all x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypFx {
    pub x0: f64,
    pub lambda: f64,
    pub c: f64,
}

/// Which Lyapunov construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IrfMode {
    /// W = 1/2 + |x|^p, p ≥ 1.
    Polynomial { p: f64 },
    /// W = (1/2) e^{δ|x|}, certified at drift rate `epsilon`.
    Exponential { delta: f64, epsilon: f64 },
}

/// Fits the affine growth bound of F on the grid.
///
/// x₀ is the grid point closest to the origin. λ is the largest slope
/// |F(x) − F(x₀)|/|x − x₀| over the outer half of the grid (the growth at
/// infinity), and c absorbs whatever the slope misses closer in.
pub fn fit_hyp_fx(map: &AffineMap, grid: &Grid) -> Result<HypFx> {
    grid.require_1d()?;
    let xs: Vec<f64> = grid.coords().collect();
    let x0 = xs.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).expect("non-empty grid");
    let f0 = map.apply(x0);
    let reach = xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    if reach == 0.0 {
        return Err(Error::Config("hypFx fit needs at least two grid points".into()));
    }
    let lambda = xs
        .iter()
        .filter(|x| (*x - x0).abs() >= 0.5 * reach)
        .map(|x| (map.apply(*x) - f0).abs() / (x - x0).abs())
        .fold(0.0, f64::max);
    let c = xs.iter().map(|x| (map.apply(*x) - f0).abs() - lambda * (x - x0).abs()).fold(0.0, f64::max);
    Ok(HypFx { x0, lambda, c })
}

/// Predicted drift constants and their direct check on the grid kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrfLyapunov {
    pub mode: IrfMode,
    pub fit: HypFx,
    /// False when λ(x₀) ≥ 1; all other fields are then empty.
    pub certifiable: bool,
    /// Half the widest cell: the largest displacement caused by snapping
    /// F(x) + z to the grid. It enters c_λ so that predictions cover the
    /// discretized kernel.
    pub grid_slack: f64,
    /// c_λ = c(x₀) + |F(x₀)| + λ|x₀| + grid slack.
    pub c_lambda: Option<f64>,
    /// Level r for the polynomial construction, c_{λ,p}/(λ₀(1 − λ₀)).
    pub level: Option<f64>,
    pub predicted_epsilon: Option<f64>,
    pub predicted_c: Option<f64>,
    /// Direct drift certificate on the built kernel at the predicted ε.
    pub direct: Option<DriftCertificate>,
    /// Direct c at the predicted ε does not exceed the predicted c.
    pub prediction_holds: bool,
    #[serde(skip)]
    pub weight: Option<WeightFunction>,
}

pub fn irf_lyapunov(model: &IrfModel, grid: &Grid, mode: IrfMode, fit: Option<HypFx>) -> Result<IrfLyapunov> {
    let fit = match fit {
        Some(f) => f,
        None => fit_hyp_fx(&model.map, grid)?,
    };
    let edges = grid.require_1d()?;
    let grid_slack = edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max) / 2.0;
    let mut out = IrfLyapunov {
        mode,
        fit,
        certifiable: false,
        grid_slack,
        c_lambda: None,
        level: None,
        predicted_epsilon: None,
        predicted_c: None,
        direct: None,
        prediction_holds: false,
        weight: None,
    };
    let lambda0 = fit.lambda;
    if !(lambda0 < 1.0) {
        return Ok(out);
    }
    // A zero slope is covered by any positive one.
    let lambda0 = lambda0.max(1e-12);
    let c_lambda = fit.c + model.map.apply(fit.x0).abs() + lambda0 * fit.x0.abs() + grid_slack;
    let (z, w) = model.noise.atoms()?;
    let (weight, eps, c, level) = match mode {
        IrfMode::Polynomial { p } => {
            if !(p >= 1.0) {
                return Err(Error::Config(format!("polynomial mode needs p >= 1, got {p}")));
            }
            let moment: f64 = z.iter().zip(w.weights()).map(|(z, w)| w * z.abs().powf(p)).sum();
            let c_lp = c_lambda + moment.powf(1.0 / p);
            let lambda1 = 1.0 - (1.0 - lambda0).powi(2);
            let r = c_lp / (lambda0 * (1.0 - lambda0));
            let c = 0.5 + (lambda0 * r + c_lp).powf(p);
            (WeightFunction::polynomial(grid, p)?, lambda1.powf(p), c, Some(r))
        }
        IrfMode::Exponential { delta, epsilon } => {
            if !(delta > 0.0 && epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::Config("exponential mode needs delta > 0 and epsilon in (0,1)".into()));
            }
            let mgf: f64 = z.iter().zip(w.weights()).map(|(z, w)| w * (delta * z.abs()).exp()).sum();
            let a1 = (delta * c_lambda).exp() * mgf;
            // P(W)/W ≤ Θ(x) = a₁ e^{−δ(1−λ₀)|x|}; outside {Θ ≥ ε} the drift
            // rate is ε, inside P(W) ≤ ‖Θ‖ sup W.
            let c = if epsilon >= a1 {
                0.0
            } else {
                let radius = (a1 / epsilon).ln() / (delta * (1.0 - lambda0));
                a1 * 0.5 * (delta * radius).exp()
            };
            (WeightFunction::exponential(grid, delta, 0.5)?, epsilon, c, None)
        }
    };
    let kernel = build_irf_kernel(model, grid)?;
    let direct = certify_drift_with(&kernel, &weight, &default_eps_grid(), DriftObjective::Fixed { epsilon: eps })?;
    out.certifiable = true;
    out.c_lambda = Some(c_lambda);
    out.level = level;
    out.predicted_epsilon = Some(eps);
    out.predicted_c = Some(c);
    out.prediction_holds = direct.c <= c * (1.0 + 1e-12);
    out.direct = Some(direct);
    out.weight = Some(weight);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::NoiseSpec;
    use crate::measures::DomainTag;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid {
        Grid::build(DomainTag::OpenInterval { a: -8.0, b: 8.0 }, 200).unwrap()
    }

    #[test]
    fn fit_of_affine_and_tanh_maps() {
        let f = fit_hyp_fx(&AffineMap::Affine { a: 0.5, b: 1.0 }, &grid()).unwrap();
        assert_abs_diff_eq!(f.lambda, 0.5, epsilon = 1e-12);
        assert!(f.c < 1e-12);
        let f = fit_hyp_fx(&AffineMap::Tanh { a: 0.5, b: 1.0 }, &grid()).unwrap();
        assert!(f.lambda < 1.0 && f.c > 0.0);
    }

    #[test]
    fn gaussian_polynomial_prediction_is_dominated() {
        let model = IrfModel { map: AffineMap::Affine { a: 0.5, b: 0.0 }, noise: NoiseSpec::Gaussian { sd: 1.0, atoms: 201, width: 8.0 } };
        let out = irf_lyapunov(&model, &grid(), IrfMode::Polynomial { p: 2.0 }, None).unwrap();
        assert!(out.certifiable && out.prediction_holds);
        assert_abs_diff_eq!(out.predicted_epsilon.unwrap(), 0.5625, epsilon = 1e-12);
        // Closed form: P(V) − V/2 = 5/4 − x²/4, so c(1/2) = 5/4 up to the
        // error of snapping F(x) + z to cell centres.
        let direct = out.direct.unwrap();
        let at_half = direct.frontier.iter().find(|p| (p.epsilon - 0.5).abs() < 1e-12).unwrap();
        assert_abs_diff_eq!(at_half.c, 1.25, epsilon = 2e-2);
    }

    #[test]
    fn zero_noise_and_bounded_noise() {
        let model = IrfModel { map: AffineMap::Affine { a: 0.5, b: 0.0 }, noise: NoiseSpec::Dirac };
        let out = irf_lyapunov(&model, &grid(), IrfMode::Polynomial { p: 1.0 }, None).unwrap();
        assert!(out.prediction_holds);
        let direct = out.direct.unwrap();
        let at_half = direct.frontier.iter().find(|p| (p.epsilon - 0.5).abs() < 1e-12).unwrap();
        // V = 1/2 + |x| keeps a constant 1/4 after halving.
        assert!(at_half.c <= 0.25 + out.grid_slack);

        let model =
            IrfModel { map: AffineMap::Affine { a: 0.5, b: 0.0 }, noise: NoiseSpec::Uniform { half_width: 1.0, atoms: 21 } };
        let out = irf_lyapunov(&model, &grid(), IrfMode::Exponential { delta: 0.5, epsilon: 0.5 }, None).unwrap();
        assert!(out.prediction_holds);
        assert!(out.direct.unwrap().residual <= 0.0);
    }

    #[test]
    fn expanding_map_is_not_certifiable() {
        let model = IrfModel { map: AffineMap::Affine { a: 1.5, b: 0.0 }, noise: NoiseSpec::Dirac };
        let out = irf_lyapunov(&model, &grid(), IrfMode::Polynomial { p: 2.0 }, None).unwrap();
        assert!(!out.certifiable && out.direct.is_none());
    }
}
