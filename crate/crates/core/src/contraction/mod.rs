//! Dobrushin coefficients, the explicit contraction bounds, decay curves,
//! invariant measures, continuous-time rates and the fixed-point application.
//!
//! Suprema over pairs of points are taken over grid pairs, which is exact for
//! the discretized chain and a lower bound for the continuum coefficient.

mod bounds;
mod comparison;
mod decay;
mod fixed_point;
mod invariant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::kernels::{left_action_raw, KernelMatrix};
use crate::measures::DiscreteMeasure;
use crate::semidistance::CostFunction;
use crate::transport::distance;

pub use bounds::{
    bound_sweep, geometric_r_grid, gibbs_theorem_check, sweep_levels, theorem1_bounds, theorem_check, BoundReport, BoundSweep,
    GibbsTheoremCheck, SweepEntry, TheoremCheck, TheoremRow,
};
pub use comparison::{comparison_suite, CheckKind, ComparisonCheck, ComparisonReport};
pub use decay::{
    continuous_time_rate, decay_curve, fit_decay, wasserstein_curve, wasserstein_from_vnorm, ContinuousRate, DecayCurve,
    DecayFit, DecaySample, TheoremCurve, VType, WassersteinBound, FIT_FLOOR, UNDERFLOW,
};
pub use fixed_point::{fixed_point, fixed_point_certificate, FixedPointCertificate, FixedPointReport, FixedPointStatus};
pub use invariant::{invariant_measure, InvariantReport};

/// Slack of the Dirac-pair inequality for measure pairs.
pub const MEASURE_CHECK_SLACK: f64 = 1e-9;

/// β_{ψ,φ}(P) = max over grid pairs x ≠ y of D_φ(δ_x P, δ_y P)/ψ(x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionEstimate {
    pub value: f64,
    pub psi_label: String,
    pub phi_label: String,
    pub witness_pair: (usize, usize),
    pub n_pairs_evaluated: usize,
    /// Always true: the supremum is over grid pairs of the discretized chain.
    pub grid_exact: bool,
}

impl ContractionEstimate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// ℓ_{ψ,φ}(P)(x, y) for one pair.
pub fn pair_ratio(p: &KernelMatrix, psi: &CostFunction, phi: &CostFunction, x: usize, y: usize) -> Result<f64> {
    let d = psi.evaluate(x, y);
    if !(d > 0.0) {
        return Err(Error::AxiomViolation(x, y));
    }
    Ok(distance(p.row(x), p.row(y), phi)? / d)
}

/// Dirac-pair Dobrushin coefficient, evaluated in parallel over all pairs.
pub fn dobrushin(p: &KernelMatrix, psi: &CostFunction, phi: &CostFunction) -> Result<ContractionEstimate> {
    let n = p.len();
    check_len(n, psi.len())?;
    check_len(n, phi.len())?;
    let sym = psi.is_symmetric() && phi.is_symmetric();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| if sym { j > i } else { j != i }).map(move |j| (i, j)))
        .collect();
    let ratios: Vec<f64> = pairs.par_iter().map(|&(i, j)| pair_ratio(p, psi, phi, i, j)).collect::<Result<_>>()?;
    let (value, witness_pair) = ratios
        .iter()
        .zip(&pairs)
        .fold((0.0, (0, 0)), |acc, (r, pair)| if *r > acc.0 { (*r, *pair) } else { acc });
    Ok(ContractionEstimate {
        value,
        psi_label: psi.label().to_string(),
        phi_label: phi.label().to_string(),
        witness_pair,
        n_pairs_evaluated: pairs.len(),
        grid_exact: true,
    })
}

/// Outcome of checking D_φ(μ1P, μ2P) ≤ β D_ψ(μ1, μ2) on measure pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureCheckReport {
    pub beta: f64,
    pub n_pairs: usize,
    /// min over pairs of β D_ψ(μ1, μ2) − D_φ(μ1P, μ2P).
    pub worst_slack: f64,
    /// Pairs with slack below −1e-9.
    pub violations: usize,
}

impl MeasureCheckReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks the Dirac-pair coefficient against arbitrary measure pairs.
pub fn dobrushin_measure_check(
    p: &KernelMatrix,
    psi: &CostFunction,
    phi: &CostFunction,
    beta: &ContractionEstimate,
    pairs: &[(DiscreteMeasure, DiscreteMeasure)],
) -> Result<MeasureCheckReport> {
    let slacks: Vec<f64> = pairs
        .par_iter()
        .map(|(m1, m2)| {
            check_len(p.len(), m1.len())?;
            check_len(p.len(), m2.len())?;
            let input = distance(m1.weights(), m2.weights(), psi)?;
            let (a, b) = (left_action_raw(m1.weights(), p), left_action_raw(m2.weights(), p));
            let (a, b) = (DiscreteMeasure::normalized(a)?, DiscreteMeasure::normalized(b)?);
            let output = distance(a.weights(), b.weights(), phi)?;
            Ok(beta.value * input - output)
        })
        .collect::<Result<_>>()?;
    Ok(MeasureCheckReport {
        beta: beta.value,
        n_pairs: pairs.len(),
        worst_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
        violations: slacks.iter().filter(|s| **s < -MEASURE_CHECK_SLACK).count(),
    })
}

/// Random pairs of measures that are not Dirac masses: dense pairs and
/// pairs supported on a few points, alternating.
pub fn random_measure_pairs<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<(DiscreteMeasure, DiscreteMeasure)> {
    (0..count)
        .map(|k| {
            if k % 2 == 0 || n < 3 {
                (DiscreteMeasure::random(n, rng), DiscreteMeasure::random(n, rng))
            } else {
                let s = 2 + k % (n.min(6) - 1);
                (DiscreteMeasure::random_sparse(n, s, rng), DiscreteMeasure::random_sparse(n, s, rng))
            }
        })
        .collect()
}
