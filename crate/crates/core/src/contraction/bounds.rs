//! The explicit contraction estimates and their check against measured
//! coefficients.

use serde::Serialize;

use super::dobrushin;
use crate::certify::{certify_drift, certify_drift_pair, contraction_profile, DriftCertificate, PairDriftCertificate};
use crate::error::{Error, Result};
use crate::kernels::{GibbsPair, KernelMatrix};
use crate::measures::{rescale_weight, WeightFunction};
use crate::semidistance::{discrete_metric, rho_family};

/// Explicit constants and contraction bounds at one level r, for a drift
/// condition already rescaled to c = 1/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub c: f64,
    pub r: f64,
    pub alpha: f64,
    pub iota: f64,
    pub r0: f64,
    /// 1/(1−ε).
    pub r_eps: f64,
    /// ((1−ε)/(2+ε))(1 − r_ε/r).
    pub delta: f64,
    /// α/((1+ε)2r).
    pub rho: f64,
    /// 1 − δα/2, bounding β_{φ_ρ}(P).
    pub bound_re3: f64,
    /// (1 − α min{δ/2, α})^{1−ι}, bounding β_{κ_{ι,ρ}}(P).
    pub bound_reupsilon: f64,
    /// ρ(1 − bound_re3): largest ‖φ/φ_V‖ for which `bound_re3cor` applies.
    pub bound_re3cor_threshold: f64,
    /// 1 − (1 − bound_re3)², bounding β_{φ_ρ}(P) for φ_ρ = φ + φ_ρ.
    pub bound_re3cor: f64,
    /// Whether the supplied ‖φ/φ_V‖ is within the threshold.
    pub re3cor_applicable: Option<bool>,
    /// (1 − δα/2)², the bound for two-block products.
    pub bound_pregibbs: f64,
}

/// Evaluates the explicit constants.
///
/// Refuses r ≤ max(r_ε, r₀), ε outside (0,1), α outside (0,1] and ι outside
/// [1/2, 1) instead of clamping.
pub fn theorem1_bounds(
    epsilon: f64,
    alpha: f64,
    r: f64,
    iota: f64,
    r0: f64,
    phi_ratio: Option<f64>,
) -> Result<BoundReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} not in (0,1)")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange(format!("alpha {alpha} not in (0,1]")));
    }
    if !(0.5..1.0).contains(&iota) {
        return Err(Error::OutOfRange(format!("iota {iota} not in [1/2,1)")));
    }
    let r_eps = 1.0 / (1.0 - epsilon);
    if !(r > r_eps.max(r0)) {
        return Err(Error::OutOfRange(format!("r = {r} must exceed max(r_eps, r0) = {}", r_eps.max(r0))));
    }
    let delta = (1.0 - epsilon) / (2.0 + epsilon) * (1.0 - r_eps / r);
    let rho = alpha / ((1.0 + epsilon) * 2.0 * r);
    debug_assert!(rho > 0.0 && rho <= 0.5);
    let bound_re3 = 1.0 - delta * alpha / 2.0;
    let bound_reupsilon = (1.0 - alpha * (delta / 2.0).min(alpha)).powf(1.0 - iota);
    let bound_re3cor_threshold = rho * (1.0 - bound_re3);
    let bound_re3cor = 1.0 - (1.0 - bound_re3).powi(2);
    Ok(BoundReport {
        epsilon,
        c: 0.5,
        r,
        alpha,
        iota,
        r0,
        r_eps,
        delta,
        rho,
        bound_re3,
        bound_reupsilon,
        bound_re3cor_threshold,
        bound_re3cor,
        re3cor_applicable: phi_ratio.map(|q| q <= bound_re3cor_threshold),
        bound_pregibbs: bound_re3 * bound_re3,
    })
}

/// `k` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_r_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k <= 1 || hi <= lo {
        return vec![lo];
    }
    let q = (hi / lo).ln() / (k - 1) as f64;
    (0..k).map(|i| lo * (q * i as f64).exp()).collect()
}

/// One level of an r-sweep: the bounds, or why none exist there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub r: f64,
    pub report: Option<BoundReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSweep {
    pub entries: Vec<SweepEntry>,
    /// Index of the entry with the smallest `bound_re3`.
    pub best_re3: Option<usize>,
    /// Index of the entry with the smallest `bound_reupsilon`.
    pub best_reupsilon: Option<usize>,
}

impl BoundSweep {
    pub fn best(&self) -> Option<&BoundReport> {
        self.best_re3.and_then(|k| self.entries[k].report.as_ref())
    }
}

/// Evaluates the bounds at every r, with α(r) supplied by `alpha_of`.
pub fn bound_sweep(
    epsilon: f64,
    alpha_of: impl Fn(f64) -> Option<f64>,
    r0: f64,
    iota: f64,
    rs: &[f64],
) -> BoundSweep {
    let entries: Vec<SweepEntry> = rs
        .iter()
        .map(|&r| {
            let res = match alpha_of(r) {
                Some(a) if a > 0.0 => theorem1_bounds(epsilon, a, r, iota, r0, None),
                _ => Err(Error::OutOfRange(format!("no local contraction at r = {r}"))),
            };
            match res {
                Ok(rep) => SweepEntry { r, report: Some(rep), error: None },
                Err(e) => SweepEntry { r, report: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let best = |key: fn(&BoundReport) -> f64| {
        entries
            .iter()
            .enumerate()
            .filter_map(|(k, e)| e.report.as_ref().map(|r| (k, key(r))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    };
    BoundSweep { best_re3: best(|r| r.bound_re3), best_reupsilon: best(|r| r.bound_reupsilon), entries }
}

/// Measured β_{φ_ρ}(P) next to the bound at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremRow {
    pub r: f64,
    pub bounds: BoundReport,
    pub beta_measured: f64,
    pub holds: bool,
}

/// The full chain: drift certificate, rescaling to c = 1/2, α(r) from the
/// exact local total-variation contraction, and the measured coefficient
/// compared with `bound_re3` at each level of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub drift: DriftCertificate,
    /// max(c, 1): the rescaling needs c > 1/2 and any larger c is valid.
    pub c_used: f64,
    pub r0: f64,
    pub rows: Vec<TheoremRow>,
    pub sweep: BoundSweep,
}

impl TheoremCheck {
    pub fn all_hold(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.holds)
    }
}

/// Tolerance on measured coefficients against the explicit bounds.
pub const BOUND_TOL: f64 = 1e-6;

/// `k` geometric levels from just above max(r_ε, r₀) to twice `top`.
pub fn sweep_levels(r_eps: f64, r0: f64, top: f64, k: usize) -> Vec<f64> {
    let lo = r_eps.max(r0) * 1.001;
    geometric_r_grid(lo, (2.0 * top).max(lo * 1.01), k)
}

/// Runs [`TheoremCheck`] on `k` levels between max(r_ε, r₀) and twice the
/// largest pair level.
pub fn theorem_check(
    p: &KernelMatrix,
    v: &WeightFunction,
    eps_grid: &[f64],
    iota: f64,
    k: usize,
) -> Result<TheoremCheck> {
    let drift = certify_drift(p, v, eps_grid)?;
    let c_used = drift.c.max(1.0);
    let v_bar = rescale_weight(v, drift.epsilon, c_used)?;
    let profile = contraction_profile(p, &discrete_metric(p.len()), &v_bar)?;
    let r0 = profile.r0();
    let rs = sweep_levels(1.0 / (1.0 - drift.epsilon), r0, profile.max_level(), k);
    let sweep = bound_sweep(drift.epsilon, |r| profile.alpha(r), r0, iota, &rs);
    let rows = sweep
        .entries
        .iter()
        .filter_map(|e| e.report.clone())
        .map(|b| {
            let fam = rho_family(&v_bar, b.rho)?;
            let beta = dobrushin(p, &fam.phi_rho, &fam.phi_rho)?.value;
            Ok(TheoremRow { r: b.r, holds: beta <= b.bound_re3 + BOUND_TOL, beta_measured: beta, bounds: b })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoremCheck { drift, c_used, r0, rows, sweep })
}

/// The two-block version: β_{φ_ρ}(KL) against `bound_pregibbs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsTheoremCheck {
    pub drift: PairDriftCertificate,
    pub c_used: f64,
    pub r0: f64,
    pub rows: Vec<TheoremRow>,
}

impl GibbsTheoremCheck {
    pub fn all_hold(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.holds)
    }
}

/// K is local on the x-block (levels of V̄), L on the y-block (levels of W̄);
/// α(r) is the smaller of the two total-variation contractions.
pub fn gibbs_theorem_check(pair: &GibbsPair, k: usize) -> Result<GibbsTheoremCheck> {
    let drift = certify_drift_pair(&pair.k, &pair.l, &pair.v, &pair.w, None)?;
    let c_used = drift.c0.max(1.0);
    let v_bar = rescale_weight(&pair.v, drift.epsilon0, c_used)?;
    let w_bar = rescale_weight(&pair.w, drift.epsilon0, c_used)?;
    let phi0 = discrete_metric(pair.k.len());
    let prof_k = contraction_profile(&pair.k, &phi0, &v_bar)?;
    let prof_l = contraction_profile(&pair.l, &phi0, &w_bar)?;
    let r0 = prof_k.r0().max(prof_l.r0());
    let top = prof_k.max_level().max(prof_l.max_level());
    let rs = sweep_levels(1.0 / (1.0 - drift.epsilon0), r0, top, k);
    let alpha_of = |r: f64| Some(prof_k.alpha(r)?.min(prof_l.alpha(r)?));
    let sweep = bound_sweep(drift.epsilon0, alpha_of, r0, 0.5, &rs);
    let kl = pair.product()?;
    let rows = sweep
        .entries
        .iter()
        .filter_map(|e| e.report.clone())
        .map(|b| {
            let fam = rho_family(&v_bar, b.rho)?;
            let beta = dobrushin(&kl, &fam.phi_rho, &fam.phi_rho)?.value;
            Ok(TheoremRow { r: b.r, holds: beta <= b.bound_pregibbs + BOUND_TOL, beta_measured: beta, bounds: b })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GibbsTheoremCheck { drift, c_used, r0, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_evaluated_constants() {
        let b = theorem1_bounds(0.5, 0.5, 4.0, 0.5, 1.0, Some(0.0)).unwrap();
        assert_abs_diff_eq!(b.r_eps, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.delta, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(b.rho, 1.0 / 24.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.bound_re3, 0.975, epsilon = 1e-12);
        assert_abs_diff_eq!(b.bound_reupsilon, 0.975f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.bound_reupsilon, 0.9874209, epsilon = 1e-7);
        assert_abs_diff_eq!(b.bound_pregibbs, 0.950625, epsilon = 1e-12);
        assert_eq!(b.re3cor_applicable, Some(true));
    }

    #[test]
    fn large_r_limit_and_refusals() {
        let b = theorem1_bounds(0.5, 0.5, 1e12, 0.5, 1.0, None).unwrap();
        assert_abs_diff_eq!(b.delta, 0.2, epsilon = 1e-10);
        assert!(matches!(theorem1_bounds(0.5, 0.5, 2.0, 0.5, 1.0, None), Err(Error::OutOfRange(_))));
        assert!(matches!(theorem1_bounds(0.5, 0.5, 3.0, 0.5, 3.5, None), Err(Error::OutOfRange(_))));
        assert!(theorem1_bounds(0.5, 0.0, 4.0, 0.5, 1.0, None).is_err());
        assert!(theorem1_bounds(0.5, 0.5, 4.0, 1.0, 1.0, None).is_err());
    }

    #[test]
    fn sweep_picks_the_smallest_bound() {
        let rs = geometric_r_grid(1.5, 100.0, 10);
        assert_abs_diff_eq!(rs[9], 100.0, epsilon = 1e-9);
        let sweep = bound_sweep(0.5, |_| Some(0.5), 1.0, 0.5, &rs);
        assert!(sweep.entries[0].report.is_none());
        let best = sweep.best().unwrap();
        assert!(sweep.entries.iter().filter_map(|e| e.report.as_ref()).all(|r| r.bound_re3 >= best.bound_re3));
    }
}
