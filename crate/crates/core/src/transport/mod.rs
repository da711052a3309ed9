//! Exact Kantorovich semi-distances between discrete measures.

mod brute;
mod simplex;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::measures::{half_l1, weighted_l1, DiscreteMeasure, WeightFunction};
use crate::semidistance::{CostFunction, CostStructure};

pub use brute::ORACLE_CELLS;

/// Largest marginal mismatch accepted by the solvers.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Which algorithm produced a [`TransportResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    Lp,
    #[serde(rename = "closed_form_V")]
    ClosedFormV,
    ClosedFormTv,
    BruteForce,
}

/// A coupling stored as its non-zero entries `(source, target, mass)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub n_source: usize,
    pub n_target: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n_source];
        for &(i, _, x) in &self.entries {
            s[i] += x;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n_target];
        for &(_, j, x) in &self.entries {
            s[j] += x;
        }
        s
    }

    /// π(φ).
    pub fn cost(&self, phi: &CostFunction) -> f64 {
        self.entries.iter().map(|&(i, j, x)| x * phi.evaluate(i, j)).sum()
    }

    /// Checks the marginal constraints within `tol`.
    pub fn is_coupling_of(&self, a: &[f64], b: &[f64], tol: f64) -> bool {
        self.entries.iter().all(|e| e.2 >= 0.0)
            && self.row_sums().iter().zip(a).all(|(x, y)| (x - y).abs() <= tol)
            && self.col_sums().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportResult {
    pub value: f64,
    pub plan: TransportPlan,
    pub solver_tag: SolverTag,
}

/// D_φ(μ1, μ2) by an exact method.
///
/// Costs tagged as φ₀ or φ_V use the Jordan-decomposition closed form; all
/// others are solved by the transportation simplex on the supports.
pub fn kantorovich(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, phi: &CostFunction) -> Result<TransportResult> {
    kantorovich_masses(mu1.weights(), mu2.weights(), phi)
}

/// Like [`kantorovich`] for non-negative vectors of equal total mass.
pub fn kantorovich_masses(a: &[f64], b: &[f64], phi: &CostFunction) -> Result<TransportResult> {
    check_margins(a, b, phi)?;
    match phi.structure() {
        CostStructure::Discrete => Ok(tv_result(a, b)),
        CostStructure::WeightedDiscrete(v) => Ok(vnorm_result(a, b, v)),
        CostStructure::General => lp(a, b, phi),
    }
}

/// D_φ(μ1, μ2) always through the simplex, ignoring closed forms.
pub fn kantorovich_lp(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, phi: &CostFunction) -> Result<TransportResult> {
    check_margins(mu1.weights(), mu2.weights(), phi)?;
    lp(mu1.weights(), mu2.weights(), phi)
}

/// Value-only distance between mass vectors; skips plan reconstruction on
/// the closed-form paths.
pub fn distance(a: &[f64], b: &[f64], phi: &CostFunction) -> Result<f64> {
    check_margins(a, b, phi)?;
    Ok(match phi.structure() {
        CostStructure::Discrete => half_l1(a, b),
        CostStructure::WeightedDiscrete(v) => weighted_l1(a, b, v),
        CostStructure::General => lp(a, b, phi)?.value,
    })
}

/// Brute-force oracle over all basic feasible plans (supports with m·n ≤ 16).
pub fn kantorovich_bruteforce(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    phi: &CostFunction,
) -> Result<TransportResult> {
    let (a, b) = (mu1.weights(), mu2.weights());
    check_margins(a, b, phi)?;
    let (src, tgt, sa, sb, cost) = restrict(a, b, phi);
    let (value, flows) = brute::enumerate(&sa, &sb, &cost)?;
    Ok(TransportResult {
        value,
        plan: lift(flows, &src, &tgt, a.len(), b.len()),
        solver_tag: SolverTag::BruteForce,
    })
}

/// ‖μ1 − μ2‖_V = D_{φ_V}(μ1, μ2) by direct summation.
pub fn vnorm_closed_form(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, v: &WeightFunction) -> Result<TransportResult> {
    check_len(mu1.len(), mu2.len())?;
    check_len(mu1.len(), v.len())?;
    Ok(vnorm_result(mu1.weights(), mu2.weights(), v.values()))
}

/// Total variation distance as D_{φ₀}.
pub fn tv_closed_form(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure) -> Result<TransportResult> {
    check_len(mu1.len(), mu2.len())?;
    Ok(tv_result(mu1.weights(), mu2.weights()))
}

/// osc_V(f) = max_{i≠j} |f(i) − f(j)| / (V(i) + V(j)).
pub fn osc_v(f: &[f64], v: &WeightFunction) -> Result<f64> {
    check_len(v.len(), f.len())?;
    let vals = v.values();
    let mut best = 0.0f64;
    for i in 0..f.len() {
        for j in 0..i {
            best = best.max((f[i] - f[j]).abs() / (vals[i] + vals[j]));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualReport {
    /// ‖μ1 − μ2‖_V.
    pub primal: f64,
    /// max_j |(μ1 − μ2)(f_j)| / osc_V(f_j) over non-constant trials.
    pub best_lower_bound: f64,
    pub trials_used: usize,
    /// Trials with |(μ1−μ2)(f)| > osc_V(f)·‖μ1−μ2‖_V + 1e-9.
    pub violations: Vec<usize>,
}

impl DualReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.best_lower_bound <= self.primal + 1e-9
    }
}

/// Checks |(μ1−μ2)(f)| ≤ osc_V(f)·‖μ1−μ2‖_V for each trial function.
pub fn dual_gap_check(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    v: &WeightFunction,
    trials: &[Vec<f64>],
) -> Result<DualReport> {
    let primal = vnorm_closed_form(mu1, mu2, v)?.value;
    let mut report = DualReport { primal, best_lower_bound: 0.0, trials_used: 0, violations: Vec::new() };
    for (k, f) in trials.iter().enumerate() {
        let osc = osc_v(f, v)?;
        let gap = (mu1.integrate(f)? - mu2.integrate(f)?).abs();
        if gap > osc * primal + 1e-9 {
            report.violations.push(k);
        }
        if osc > 0.0 {
            report.trials_used += 1;
            report.best_lower_bound = report.best_lower_bound.max(gap / osc);
        }
    }
    Ok(report)
}

fn check_margins(a: &[f64], b: &[f64], phi: &CostFunction) -> Result<()> {
    check_len(a.len(), b.len())?;
    check_len(phi.len(), a.len())?;
    if a.iter().chain(b).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidMeasure("masses must be finite and non-negative".into()));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > MARGINAL_TOL {
        return Err(Error::MarginalMismatch(sa, sb));
    }
    Ok(())
}

type Restricted = (Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>, Vec<f64>);

fn restrict(a: &[f64], b: &[f64], phi: &CostFunction) -> Restricted {
    let src: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let tgt: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
    let sa = src.iter().map(|&i| a[i]).collect();
    let sb = tgt.iter().map(|&j| b[j]).collect();
    let mut cost = Vec::with_capacity(src.len() * tgt.len());
    for &i in &src {
        for &j in &tgt {
            cost.push(phi.evaluate(i, j));
        }
    }
    (src, tgt, sa, sb, cost)
}

fn lift(flows: Vec<(usize, usize, f64)>, src: &[usize], tgt: &[usize], m: usize, n: usize) -> TransportPlan {
    TransportPlan {
        n_source: m,
        n_target: n,
        entries: flows.into_iter().map(|(i, j, x)| (src[i], tgt[j], x)).collect(),
    }
}

fn lp(a: &[f64], b: &[f64], phi: &CostFunction) -> Result<TransportResult> {
    let (m, n) = (a.len(), b.len());
    let (src, tgt, sa, sb, cost) = restrict(a, b, phi);
    if src.is_empty() || tgt.is_empty() {
        return Ok(TransportResult {
            value: 0.0,
            plan: TransportPlan { n_source: m, n_target: n, entries: Vec::new() },
            solver_tag: SolverTag::Lp,
        });
    }
    let sol = simplex::solve(&sa, &sb, &cost)?;
    Ok(TransportResult { value: sol.value, plan: lift(sol.flows, &src, &tgt, m, n), solver_tag: SolverTag::Lp })
}

/// Plan keeping min(a_i, b_i) in place and matching excess to deficit in
/// index order.
fn jordan_plan(a: &[f64], b: &[f64]) -> TransportPlan {
    let mut entries = Vec::new();
    let mut excess = Vec::new();
    let mut deficit = Vec::new();
    for i in 0..a.len() {
        let common = a[i].min(b[i]);
        if common > 0.0 {
            entries.push((i, i, common));
        }
        if a[i] > b[i] {
            excess.push((i, a[i] - b[i]));
        } else if b[i] > a[i] {
            deficit.push((i, b[i] - a[i]));
        }
    }
    let (mut p, mut q) = (0, 0);
    while p < excess.len() && q < deficit.len() {
        let x = excess[p].1.min(deficit[q].1);
        if x > 0.0 {
            entries.push((excess[p].0, deficit[q].0, x));
        }
        excess[p].1 -= x;
        deficit[q].1 -= x;
        if excess[p].1 <= deficit[q].1 {
            p += 1;
        } else {
            q += 1;
        }
    }
    TransportPlan { n_source: a.len(), n_target: b.len(), entries }
}

fn vnorm_result(a: &[f64], b: &[f64], v: &[f64]) -> TransportResult {
    TransportResult { value: weighted_l1(a, b, v), plan: jordan_plan(a, b), solver_tag: SolverTag::ClosedFormV }
}

fn tv_result(a: &[f64], b: &[f64]) -> TransportResult {
    TransportResult { value: half_l1(a, b), plan: jordan_plan(a, b), solver_tag: SolverTag::ClosedFormTv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DomainTag, Grid};
    use crate::semidistance::{discrete_metric, power_metric, weighted_discrete};
    use approx::assert_abs_diff_eq;

    fn m(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(w.to_vec()).unwrap()
    }

    fn two_points() -> Grid {
        Grid::from_parts(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0], DomainTag::OpenInterval { a: -1.0, b: 2.0 })
            .unwrap()
    }

    #[test]
    fn line_example() {
        let phi = power_metric(1.0, &two_points()).unwrap();
        let r = kantorovich(&m(&[1.0, 0.0]), &m(&[0.3, 0.7]), &phi).unwrap();
        assert_abs_diff_eq!(r.value, 0.7, epsilon = 1e-15);
        assert_eq!(r.solver_tag, SolverTag::Lp);
        assert!(r.plan.is_coupling_of(&[1.0, 0.0], &[0.3, 0.7], 1e-12));
    }

    #[test]
    fn identical_measures_and_diracs() {
        let phi = power_metric(1.0, &two_points()).unwrap();
        let mu = m(&[0.4, 0.6]);
        let r = kantorovich(&mu, &mu, &phi).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.plan.entries.iter().all(|e| e.0 == e.1));
        let d = kantorovich(&DiscreteMeasure::dirac(2, 0), &DiscreteMeasure::dirac(2, 1), &phi).unwrap();
        assert_eq!(d.value, 1.0);
    }

    #[test]
    fn closed_forms() {
        let v = WeightFunction::new(vec![1.0, 3.0]).unwrap();
        let (a, b) = (DiscreteMeasure::dirac(2, 0), DiscreteMeasure::dirac(2, 1));
        assert_eq!(vnorm_closed_form(&a, &b, &v).unwrap().value, 4.0);
        let v24 = WeightFunction::new(vec![2.0, 4.0]).unwrap();
        let r = vnorm_closed_form(&m(&[0.5, 0.5]), &b, &v24).unwrap();
        assert_eq!(r.value, 3.0);
        assert_abs_diff_eq!(r.plan.cost(&weighted_discrete(&v24)), 3.0, epsilon = 1e-15);

        let p = m(&[0.5, 0.5, 0.0]);
        let q = m(&[0.0, 0.5, 0.5]);
        let t = tv_closed_form(&p, &q).unwrap();
        assert_eq!(t.value, 0.5);
        assert_eq!(t.solver_tag, SolverTag::ClosedFormTv);
        assert!(t.plan.is_coupling_of(p.weights(), q.weights(), 1e-15));
        assert_eq!(kantorovich(&p, &q, &discrete_metric(3)).unwrap().value, 0.5);
    }

    #[test]
    fn oscillation_and_duality() {
        let ones = WeightFunction::constant(2, 1.0).unwrap();
        assert_eq!(osc_v(&[0.0, 1.0], &ones).unwrap(), 0.5);
        assert_eq!(osc_v(&[2.0, 2.0], &ones).unwrap(), 0.0);
        let v = WeightFunction::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(osc_v(&[0.0, 3.0], &v).unwrap(), 1.0);

        let (a, b) = (DiscreteMeasure::dirac(2, 0), DiscreteMeasure::dirac(2, 1));
        let rep = dual_gap_check(&a, &b, &ones, &[vec![0.0, 1.0], vec![5.0, 5.0]]).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.trials_used, 1);
        assert_abs_diff_eq!(rep.best_lower_bound, rep.primal, epsilon = 1e-15);
    }

    #[test]
    fn marginal_mismatch() {
        let phi = discrete_metric(2);
        assert!(matches!(kantorovich_masses(&[1.0, 0.0], &[0.5, 0.0], &phi), Err(Error::MarginalMismatch(..))));
    }

    #[test]
    fn bruteforce_matches_lp_on_small_case() {
        let g = Grid::build(DomainTag::OpenInterval { a: 0.0, b: 1.0 }, 4).unwrap();
        let phi = power_metric(2.0, &g).unwrap();
        let (a, b) = (m(&[0.1, 0.2, 0.3, 0.4]), m(&[0.4, 0.3, 0.2, 0.1]));
        let x = kantorovich(&a, &b, &phi).unwrap().value;
        let y = kantorovich_bruteforce(&a, &b, &phi).unwrap().value;
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }
}
