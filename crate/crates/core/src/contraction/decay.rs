//! Decay of distances along the semigroup, rate fits, continuous-time rates
//! and Wasserstein bounds.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::kernels::{left_action_raw, KernelMatrix};
use crate::measures::{weighted_l1, DiscreteMeasure, Grid, WeightFunction};
use crate::semidistance::{power_metric, CostFunction};
use crate::transport::distance;

/// Distances below this value end the fitted part of a curve.
pub const UNDERFLOW: f64 = 1e-14;

/// Samples below this fraction of d₀ are reported but not fitted: they are
/// differences of O(1) probability vectors and carry large relative roundoff.
pub const FIT_FLOOR: f64 = 1e-10;

/// Least-squares fit of log d_n = log C + n log λ after a burn-in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub samples: Vec<(usize, f64)>,
    pub lambda_fit: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub burn_in: usize,
}

impl DecayFit {
    /// C λⁿ.
    pub fn predict(&self, n: usize) -> f64 {
        self.prefactor * self.lambda_fit.powi(n as i32)
    }
}

/// Fits the geometric rate of a positive curve.
///
/// The burn-in is the larger of the first 20% of samples and the point from
/// which every local log-slope stays within 5% of the median slope of the
/// second half, keeping at least three points. Returns `None` for fewer than
/// three positive samples.
pub fn fit_decay(samples: &[(usize, f64)]) -> Option<DecayFit> {
    let pts: Vec<(usize, f64)> = samples.iter().copied().take_while(|(_, d)| *d > 0.0 && d.is_finite()).collect();
    if pts.len() < 3 {
        return None;
    }
    let logs: Vec<f64> = pts.iter().map(|(_, d)| d.ln()).collect();
    let slopes: Vec<f64> = pts
        .windows(2)
        .zip(logs.windows(2))
        .map(|(p, l)| (l[1] - l[0]) / (p[1].0 - p[0].0) as f64)
        .collect();
    let mut tail: Vec<f64> = slopes[slopes.len() / 2..].to_vec();
    tail.sort_by(f64::total_cmp);
    let median = tail[tail.len() / 2];
    let stable_from = (0..slopes.len())
        .find(|&k| slopes[k..].iter().all(|s| (s - median).abs() <= 0.05 * median.abs()))
        .unwrap_or(0);
    let burn_in = (pts.len() as f64 * 0.2).ceil() as usize;
    let burn_in = burn_in.max(stable_from).min(pts.len() - 3);

    let (xs, ys): (Vec<f64>, Vec<f64>) = pts[burn_in..].iter().zip(&logs[burn_in..]).map(|((n, _), l)| (*n as f64, *l)).unzip();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Some(DecayFit { samples: pts, lambda_fit: slope.exp(), prefactor: intercept.exp(), r_squared, burn_in })
}

/// Reference curve C λⁿ ‖μ1 − μ2‖_V printed next to a measured curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremCurve {
    pub lambda: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySample {
    pub n: usize,
    /// D_φ(μ1Pₙ, μ2Pₙ).
    pub d_phi: f64,
    /// ‖μ1Pₙ − μ2Pₙ‖_V.
    pub d_v: f64,
    pub theorem_bound: Option<f64>,
    /// d_V / theorem_bound.
    pub ratio_to_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub phi_label: String,
    pub v_label: String,
    pub samples: Vec<DecaySample>,
    /// First n with d_φ below [`UNDERFLOW`]; later samples are not fitted.
    pub truncated_at: Option<usize>,
    pub fit_phi: Option<DecayFit>,
    pub fit_v: Option<DecayFit>,
}

/// d_n = D_φ(μ1Pₙ, μ2Pₙ) and ‖μ1Pₙ − μ2Pₙ‖_V for n = 0..=horizon.
pub fn decay_curve(
    p: &KernelMatrix,
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    phi: &CostFunction,
    v: &WeightFunction,
    horizon: usize,
    theorem: Option<TheoremCurve>,
) -> Result<DecayCurve> {
    if horizon < 5 {
        return Err(Error::OutOfRange(format!("horizon {horizon} must be at least 5")));
    }
    let n = p.len();
    for len in [mu1.len(), mu2.len(), phi.len(), v.len()] {
        check_len(n, len)?;
    }
    let d0_v = weighted_l1(mu1.weights(), mu2.weights(), v.values());
    let (mut a, mut b) = (mu1.weights().to_vec(), mu2.weights().to_vec());
    let mut samples = Vec::with_capacity(horizon + 1);
    let mut truncated_at = None;
    for step in 0..=horizon {
        if step > 0 {
            a = DiscreteMeasure::normalized(left_action_raw(&a, p))?.into_weights();
            b = DiscreteMeasure::normalized(left_action_raw(&b, p))?.into_weights();
        }
        let d_phi = if truncated_at.is_some() { 0.0 } else { distance(&a, &b, phi)? };
        if truncated_at.is_none() && d_phi < UNDERFLOW {
            truncated_at = Some(step);
        }
        let d_v = weighted_l1(&a, &b, v.values());
        let theorem_bound = theorem.map(|t| t.prefactor * t.lambda.powi(step as i32) * d0_v);
        let ratio_to_bound = theorem_bound.filter(|b| *b > 0.0).map(|b| d_v / b);
        samples.push(DecaySample { n: step, d_phi, d_v, theorem_bound, ratio_to_bound });
    }
    let fit_on = |get: fn(&DecaySample) -> f64| {
        let floor = UNDERFLOW.max(FIT_FLOOR * get(&samples[0]));
        let pts: Vec<(usize, f64)> = samples.iter().map(|s| (s.n, get(s))).take_while(|(_, d)| *d >= floor).collect();
        fit_decay(&pts)
    };
    let fit_phi = fit_on(|s| s.d_phi);
    let fit_v = fit_on(|s| s.d_v);
    Ok(DecayCurve {
        phi_label: phi.label().to_string(),
        v_label: v.label().to_string(),
        samples,
        truncated_at,
        fit_phi,
        fit_v,
    })
}

/// Rate and prefactor transferred from the h-skeleton to continuous time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousRate {
    pub h: f64,
    pub lambda_h: f64,
    pub c_h: f64,
    pub iota: f64,
    /// ς_h = −ln(λ_h)/h.
    pub varsigma: f64,
    /// c_{ι,h} = ι c_h / λ_h.
    pub prefactor: f64,
}

impl ContinuousRate {
    /// c_{ι,h} e^{−ς_h t}.
    pub fn bound_at(&self, t: f64) -> f64 {
        self.prefactor * (-self.varsigma * t).exp()
    }
}

pub fn continuous_time_rate(h: f64, lambda_h: f64, c_h: f64, iota: f64) -> Result<ContinuousRate> {
    if !(h > 0.0) || !(lambda_h > 0.0 && lambda_h < 1.0) {
        return Err(Error::OutOfRange(format!("need h > 0 and lambda_h in (0,1), got {h}, {lambda_h}")));
    }
    Ok(ContinuousRate { h, lambda_h, c_h, iota, varsigma: -lambda_h.ln() / h, prefactor: iota * c_h / lambda_h })
}

/// Shape of the Lyapunov function behind a V-norm curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VType {
    /// V = 1/2 + ‖x‖^p.
    Poly { p: f64 },
    /// V = exp(δ‖x‖).
    Exp { delta: f64 },
}

impl VType {
    /// c_p with ϖ_V ≥ c_p ψ^p.
    pub fn c_p(&self, p: f64) -> f64 {
        match *self {
            VType::Poly { p: q } => {
                debug_assert!(q == p || p == 1.0);
                2f64.powf(-(p - 1.0).max(0.0))
            }
            VType::Exp { delta } => delta.powf(p) / (2f64.powf(p - 1.0) * libm::tgamma(p + 1.0)),
        }
    }
}

/// W_p^p(μ1Pₙ, μ2Pₙ) ≤ c_p⁻¹ × (V-norm bound at n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WassersteinBound {
    pub p: f64,
    pub c_p: f64,
    /// (n, c_p⁻¹ C λⁿ) from the fitted V-norm curve.
    pub fitted_bound: Vec<(usize, f64)>,
}

pub fn wasserstein_from_vnorm(fit: &DecayFit, vtype: VType, p: f64, horizon: usize) -> Result<WassersteinBound> {
    if !(p >= 1.0) {
        return Err(Error::OutOfRange(format!("p = {p} must be at least 1")));
    }
    let c_p = vtype.c_p(p);
    Ok(WassersteinBound { p, c_p, fitted_bound: (0..=horizon).map(|n| (n, fit.predict(n) / c_p)).collect() })
}

/// Measured W_p^p(μ1Pₙ, μ2Pₙ) = D_{ψ^p} for n = 0..=horizon.
pub fn wasserstein_curve(
    p: &KernelMatrix,
    grid: &Grid,
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    power: f64,
    horizon: usize,
) -> Result<Vec<f64>> {
    let cost = power_metric(power, grid)?.materialize();
    let (mut a, mut b) = (mu1.weights().to_vec(), mu2.weights().to_vec());
    let mut out = Vec::with_capacity(horizon + 1);
    for step in 0..=horizon {
        if step > 0 {
            a = DiscreteMeasure::normalized(left_action_raw(&a, p))?.into_weights();
            b = DiscreteMeasure::normalized(left_action_raw(&b, p))?.into_weights();
        }
        out.push(distance(&a, &b, &cost)?);
    }
    Ok(out)
}
