//! Scaling, comparison and product rules for Dobrushin coefficients,
//! checked numerically.

use serde::Serialize;

use super::dobrushin;
use crate::error::{check_len, Error, Result};
use crate::kernels::KernelMatrix;
use crate::semidistance::{additive_cost, CostFunction};

/// Tolerance for every check in the suite.
pub const COMPARISON_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Equality,
    /// lhs ≤ rhs.
    Inequality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonCheck {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs for inequalities, −|lhs − rhs| for equalities.
    pub slack: f64,
}

impl ComparisonCheck {
    fn new(name: &str, kind: CheckKind, lhs: f64, rhs: f64) -> Self {
        let slack = match kind {
            CheckKind::Equality => -(lhs - rhs).abs(),
            CheckKind::Inequality => rhs - lhs,
        };
        ComparisonCheck { name: name.into(), kind, lhs, rhs, slack }
    }

    pub fn passes(&self) -> bool {
        self.slack >= -COMPARISON_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub checks: Vec<ComparisonCheck>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(ComparisonCheck::passes)
    }

    pub fn worst_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }
}

/// min and max of ψ/φ over off-diagonal pairs.
fn ratio_bounds(phi: &CostFunction, psi: &CostFunction) -> Result<(f64, f64)> {
    let n = phi.len();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let f = phi.evaluate(i, j);
            if !(f > 0.0) {
                return Err(Error::AxiomViolation(i, j));
            }
            let q = psi.evaluate(i, j) / f;
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    Ok((lo, hi))
}

/// Runs every rule on the kernel `k` (and on the product `kl` for the
/// product rule) with costs φ = `phi`, ψ = `psi`, scale `a` and exponent `iota`.
///
/// * scaling: β_{aφ}(K) = β_φ(K)
/// * power: β_{φ^ι}(K) ≤ β_φ(K)^ι
/// * comparison: with a'φ ≤ ψ ≤ b'φ, β_φ(K) ≤ (b'/a') β_ψ(K), and the same with φ, ψ swapped
/// * convex combination: with φ' = a'φ ≤ ψ and ι' = 1 − β_ψ(K), β_{ι'φ' + ψ}(K) ≤ 1 − (1 − β_ψ(K))²
/// * product: β_{φ,φ}(KL) ≤ β_{φ,ψ}(K) β_{ψ,φ}(L)
pub fn comparison_suite(
    k: &KernelMatrix,
    l: &KernelMatrix,
    phi: &CostFunction,
    psi: &CostFunction,
    a: f64,
    iota: f64,
) -> Result<ComparisonReport> {
    check_len(k.len(), l.len())?;
    if !(a > 0.0) || !(iota > 0.0 && iota <= 1.0) {
        return Err(Error::OutOfRange(format!("need a > 0 and iota in (0,1], got {a}, {iota}")));
    }
    let beta = |p: &KernelMatrix, x: &CostFunction, y: &CostFunction| dobrushin(p, x, y).map(|e| e.value);
    let b_phi = beta(k, phi, phi)?;
    let b_psi = beta(k, psi, psi)?;
    let mut checks = Vec::new();

    let scaled = phi.scaled(a);
    checks.push(ComparisonCheck::new("scaling", CheckKind::Equality, beta(k, &scaled, &scaled)?, b_phi));

    let powered = phi.powered(iota);
    checks.push(ComparisonCheck::new("power", CheckKind::Inequality, beta(k, &powered, &powered)?, b_phi.powf(iota)));

    let (lo, hi) = ratio_bounds(phi, psi)?;
    checks.push(ComparisonCheck::new("comparison", CheckKind::Inequality, b_phi, hi / lo * b_psi));
    checks.push(ComparisonCheck::new("comparison_swapped", CheckKind::Inequality, b_psi, hi / lo * b_phi));

    if b_psi < 1.0 {
        let weight = (1.0 - b_psi) * lo;
        let mixed = additive_cost(&phi.scaled(weight), psi)?;
        let b_mixed = beta(k, &mixed, &mixed)?;
        checks.push(ComparisonCheck::new("convex_combination", CheckKind::Inequality, b_mixed, 1.0 - (1.0 - b_psi).powi(2)));
    }

    let kl = k.compose(l)?;
    let lhs = beta(&kl, phi, phi)?;
    let rhs = beta(k, phi, psi)? * beta(l, psi, phi)?;
    checks.push(ComparisonCheck::new("product", CheckKind::Inequality, lhs, rhs));
    Ok(ComparisonReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semidistance::discrete_metric;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_state_examples() {
        let p = KernelMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], "two_state").unwrap();
        let phi0 = discrete_metric(2);
        let rep = comparison_suite(&p, &p, &phi0, &phi0.scaled(2.0), 3.0, 0.5).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        let scaling = &rep.checks[0];
        assert_abs_diff_eq!(scaling.lhs, 0.7, epsilon = 1e-12);
        let power = &rep.checks[1];
        assert_abs_diff_eq!(power.rhs, 0.7f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(power.rhs, 0.8366600, epsilon = 1e-7);
    }
}
