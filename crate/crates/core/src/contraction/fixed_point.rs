//! Fixed points of locally contractive point maps, with a drift and local
//! contraction certificate on the deterministic kernel δ_{F(x)}.

use serde::Serialize;

use super::bounds::{bound_sweep, sweep_levels, BoundReport};
use super::decay::{fit_decay, DecayFit, UNDERFLOW};
use crate::certify::{certify_drift, contraction_profile, default_eps_grid, DriftCertificate, LocalContractionCertificate};
use crate::error::{Error, Result};
use crate::kernels::build_deterministic_kernel;
use crate::measures::{rescale_weight, DomainTag, Grid, WeightFunction};
use crate::semidistance::power_metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointStatus {
    Converged,
    /// `max_iter` exceeded or the iterates left the reals.
    Diverged,
    /// The iteration stopped, but starts at y0 ± 1 stop at other points.
    NotContractive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub y_star: f64,
    pub iterations: usize,
    pub status: FixedPointStatus,
    /// Geometric fit of |yₙ − y*|; `None` when too few errors are positive.
    pub rate_fit: Option<DecayFit>,
    pub trajectory: Vec<f64>,
}

fn run(f: &dyn Fn(f64) -> f64, y0: f64, tol: f64, max_iter: usize) -> (Vec<f64>, bool) {
    let mut traj = vec![y0];
    for _ in 0..max_iter {
        let prev = *traj.last().expect("non-empty");
        let next = f(prev);
        traj.push(next);
        if !next.is_finite() {
            return (traj, false);
        }
        if (next - prev).abs() <= tol {
            return (traj, true);
        }
    }
    (traj, false)
}

/// Iterates yₙ = F(yₙ₋₁) until |yₙ − yₙ₋₁| ≤ `tol`.
pub fn fixed_point(f: &dyn Fn(f64) -> f64, y0: f64, tol: f64, max_iter: usize) -> Result<FixedPointReport> {
    if !(tol > 0.0) || !y0.is_finite() {
        return Err(Error::OutOfRange(format!("need tol > 0 and finite y0, got {tol}, {y0}")));
    }
    let (trajectory, stopped) = run(f, y0, tol, max_iter);
    let y_star = *trajectory.last().expect("non-empty");
    let iterations = trajectory.len() - 1;
    if !stopped {
        return Ok(FixedPointReport { y_star, iterations, status: FixedPointStatus::Diverged, rate_fit: None, trajectory });
    }
    let probe_tol = (100.0 * tol).max(1e-9 * (1.0 + y_star.abs()));
    let unique = [y0 - 1.0, y0 + 1.0].iter().all(|&s| {
        let (t, ok) = run(f, s, tol, max_iter);
        ok && (t.last().expect("non-empty") - y_star).abs() <= probe_tol
    });
    let status = if unique { FixedPointStatus::Converged } else { FixedPointStatus::NotContractive };
    // Errors near the stopping tolerance are dominated by the offset of y*.
    let floor = (1e4 * tol).max(UNDERFLOW * (1.0 + y_star.abs()));
    let errors: Vec<(usize, f64)> = trajectory
        .iter()
        .enumerate()
        .map(|(n, y)| (n, (y - y_star).abs()))
        .take_while(|(_, e)| *e > floor)
        .collect();
    Ok(FixedPointReport { y_star, iterations, status, rate_fit: fit_decay(&errors), trajectory })
}

/// Drift and local contraction of δ_{F(x)} with V = ½ exp(δ|x|) and
/// κ = |x − y|, followed by the bound sweep at ι = 1/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointCertificate {
    pub n_points: usize,
    pub clamped_fraction: f64,
    pub drift: Option<DriftCertificate>,
    pub c_used: f64,
    pub r0: f64,
    /// Local contraction at the level with the best `bound_reupsilon`.
    pub local: Option<LocalContractionCertificate>,
    pub bounds: Option<BoundReport>,
    pub succeeded: bool,
    pub error: Option<String>,
}

const IOTA: f64 = 0.5;
const SWEEP_POINTS: usize = 25;

pub fn fixed_point_certificate(
    f: impl Fn(f64) -> f64 + Sync,
    lo: f64,
    hi: f64,
    n: usize,
    delta: f64,
) -> Result<FixedPointCertificate> {
    let grid = Grid::build(DomainTag::OpenInterval { a: lo, b: hi }, n)?;
    let p = build_deterministic_kernel(f, &grid)?;
    let v = WeightFunction::exponential(&grid, delta, 0.5)?;
    let mut cert = FixedPointCertificate {
        n_points: grid.len(),
        clamped_fraction: p.diagnostics().clamped_fraction,
        drift: None,
        c_used: f64::NAN,
        r0: f64::NAN,
        local: None,
        bounds: None,
        succeeded: false,
        error: None,
    };
    let drift = match certify_drift(&p, &v, &default_eps_grid()) {
        Ok(d) => d,
        Err(e) => {
            cert.error = Some(e.to_string());
            return Ok(cert);
        }
    };
    cert.c_used = drift.c.max(1.0);
    let v_bar = rescale_weight(&v, drift.epsilon, cert.c_used)?;
    let kappa = power_metric(1.0, &grid)?;
    let profile = contraction_profile(&p, &kappa, &v_bar)?;
    cert.r0 = profile.r0();
    let rs = sweep_levels(1.0 / (1.0 - drift.epsilon), cert.r0, profile.max_level(), SWEEP_POINTS);
    let sweep = bound_sweep(drift.epsilon, |r| profile.alpha(r), cert.r0, IOTA, &rs);
    match sweep.best_reupsilon {
        Some(k) => {
            let entry = &sweep.entries[k];
            let local = profile.certificate(entry.r)?;
            let bounds = entry.report.clone().expect("best entry has a report");
            cert.succeeded = drift.residual <= 0.0 && local.alpha > 0.0 && bounds.bound_reupsilon < 1.0;
            cert.local = Some(local);
            cert.bounds = Some(bounds);
        }
        None => cert.error = Some("no level in the sweep admits local contraction".into()),
    }
    cert.drift = Some(drift);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn affine_contraction() {
        let rep = fixed_point(&|x| 0.5 * x + 1.0, 0.0, 1e-12, 1000).unwrap();
        assert_eq!(rep.status, FixedPointStatus::Converged);
        assert_abs_diff_eq!(rep.y_star, 2.0, epsilon = 1e-11);
        assert_abs_diff_eq!(rep.rate_fit.unwrap().lambda_fit, 0.5, epsilon = 1e-6);

        let rep = fixed_point(&|x| x / 2.0, 3.0, 1e-12, 1000).unwrap();
        assert_abs_diff_eq!(rep.y_star, 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(rep.rate_fit.unwrap().lambda_fit, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn identity_and_expansion() {
        let rep = fixed_point(&|x| x, 1.0, 1e-12, 100).unwrap();
        assert_eq!(rep.status, FixedPointStatus::NotContractive);
        let rep = fixed_point(&|x| 2.0 * x + 1.0, 1.0, 1e-12, 100).unwrap();
        assert_eq!(rep.status, FixedPointStatus::Diverged);
    }

    #[test]
    fn certificate_for_affine_map() {
        let cert = fixed_point_certificate(|x| 0.5 * x + 1.0, -10.0, 10.0, 101, 1.0).unwrap();
        assert!(cert.succeeded, "{cert:?}");
        assert_eq!(cert.clamped_fraction, 0.0);
        let local = cert.local.unwrap();
        assert!(local.s <= 0.5 + 1e-9, "{local:?}");
    }
}
