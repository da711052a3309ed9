//! Pairwise cost functions (semi-distances) on grid points.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::measures::{euclid, DomainTag, Grid, WeightFunction};

/// Largest grid for which [`CostFunction::materialize`] caches a dense matrix.
pub const CACHE_LIMIT: usize = 4096;

type Eval = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// Structural hint that lets the transport layer use closed forms.
#[derive(Clone, Debug, PartialEq)]
pub enum CostStructure {
    General,
    /// The discrete metric 1_{x≠y}.
    Discrete,
    /// 1_{x≠y}(V(x) + V(y)) for the stored V.
    WeightedDiscrete(Arc<[f64]>),
}

/// A non-negative pairwise cost on the points of a grid.
#[derive(Clone)]
pub struct CostFunction {
    label: String,
    symmetric: bool,
    len: usize,
    eval: Eval,
    structure: CostStructure,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("label", &self.label)
            .field("symmetric", &self.symmetric)
            .field("len", &self.len)
            .finish()
    }
}

impl CostFunction {
    pub fn from_fn(
        label: impl Into<String>,
        len: usize,
        symmetric: bool,
        f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CostFunction { label: label.into(), symmetric, len, eval: Arc::new(f), structure: CostStructure::General }
    }

    /// Cost from a dense row-major `n × n` matrix.
    pub fn from_matrix(label: impl Into<String>, n: usize, values: Vec<f64>) -> Result<Self> {
        check_len(n * n, values.len())?;
        let symmetric = (0..n).all(|i| (0..i).all(|j| values[i * n + j] == values[j * n + i]));
        let values: Arc<[f64]> = values.into();
        Ok(Self::from_fn(label, n, symmetric, move |i, j| values[i * n + j]))
    }

    #[inline]
    pub fn evaluate(&self, i: usize, j: usize) -> f64 {
        (self.eval)(i, j)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn structure(&self) -> &CostStructure {
        &self.structure
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Dense row-major matrix of all values.
    pub fn matrix(&self) -> Vec<f64> {
        let n = self.len;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.evaluate(i, j));
            }
        }
        out
    }

    /// Same cost backed by a dense cache when the grid is small enough.
    pub fn materialize(&self) -> Self {
        if self.len > CACHE_LIMIT {
            return self.clone();
        }
        let n = self.len;
        let values: Arc<[f64]> = self.matrix().into();
        CostFunction {
            label: self.label.clone(),
            symmetric: self.symmetric,
            len: n,
            eval: Arc::new(move |i, j| values[i * n + j]),
            structure: self.structure.clone(),
        }
    }

    /// a·φ.
    pub fn scaled(&self, a: f64) -> Self {
        let inner = self.eval.clone();
        let structure = match (&self.structure, a == 1.0) {
            (s, true) => s.clone(),
            _ => CostStructure::General,
        };
        CostFunction {
            label: format!("{}*{}", a, self.label),
            symmetric: self.symmetric,
            len: self.len,
            eval: Arc::new(move |i, j| a * inner(i, j)),
            structure,
        }
    }

    /// φ^ι.
    pub fn powered(&self, iota: f64) -> Self {
        let inner = self.eval.clone();
        let structure = match (&self.structure, iota) {
            (CostStructure::Discrete, _) => CostStructure::Discrete,
            (s, x) if x == 1.0 => s.clone(),
            _ => CostStructure::General,
        };
        CostFunction {
            label: format!("({})^{}", self.label, iota),
            symmetric: self.symmetric,
            len: self.len,
            eval: Arc::new(move |i, j| if i == j { 0.0 } else { inner(i, j).powf(iota) }),
            structure,
        }
    }
}

/// φ₀(x, y) = 1_{x≠y}.
pub fn discrete_metric(n: usize) -> CostFunction {
    CostFunction {
        label: "phi0".into(),
        symmetric: true,
        len: n,
        eval: Arc::new(|i, j| if i == j { 0.0 } else { 1.0 }),
        structure: CostStructure::Discrete,
    }
}

/// φ_V(x, y) = 1_{x≠y}(V(x) + V(y)).
pub fn weighted_discrete(v: &WeightFunction) -> CostFunction {
    let values: Arc<[f64]> = v.values().into();
    let vals = values.clone();
    CostFunction {
        label: format!("phiV[{}]", v.label()),
        symmetric: true,
        len: v.len(),
        eval: Arc::new(move |i, j| if i == j { 0.0 } else { vals[i] + vals[j] }),
        structure: CostStructure::WeightedDiscrete(values),
    }
}

/// The ρ-rescaled family built from a weight function V.
#[derive(Debug, Clone)]
pub struct RhoFamily {
    pub rho: f64,
    /// V_ρ = 1/2 + ρV.
    pub v_rho: WeightFunction,
    /// φ_ρ = φ₀·ϖ_ρ, equal to φ_{V_ρ}.
    pub phi_rho: CostFunction,
}

impl RhoFamily {
    /// ϖ_ρ(x, y) = 1 + ρ(V(x) + V(y)), also on the diagonal.
    pub fn varpi(&self, i: usize, j: usize) -> f64 {
        self.v_rho.pair_sum(i, j)
    }

    pub fn varpi_cost(&self) -> CostFunction {
        let v = self.v_rho.clone();
        CostFunction::from_fn(format!("varpi_rho({})", self.rho), v.len(), true, move |i, j| v.pair_sum(i, j))
    }
}

pub fn rho_family(v: &WeightFunction, rho: f64) -> Result<RhoFamily> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::OutOfRange(format!("rho {rho} must be positive")));
    }
    let values = v.values().iter().map(|x| 0.5 + rho * x).collect();
    let v_rho = WeightFunction::with_lower_bound(values, 0.5 + rho * v.lower_bound())?
        .with_label(format!("V_rho({rho})[{}]", v.label()));
    let phi_rho = weighted_discrete(&v_rho).with_label(format!("phiRho({rho})[{}]", v.label()));
    Ok(RhoFamily { rho, v_rho, phi_rho })
}

/// κ_{ι,ρ} = κ^ι·ϖ_ρ^{1−ι} off the diagonal, 0 on it.
pub fn kappa_interp(kappa: &CostFunction, v: &WeightFunction, rho: f64, iota: f64) -> Result<CostFunction> {
    check_len(kappa.len(), v.len())?;
    if !(0.0..=1.0).contains(&iota) {
        return Err(Error::OutOfRange(format!("iota {iota} not in [0,1]")));
    }
    let fam = rho_family(v, rho)?;
    let k = kappa.clone();
    let vr = fam.v_rho;
    let label = format!("kappaInterp({}, rho={rho}, iota={iota})", kappa.label());
    Ok(CostFunction::from_fn(label, v.len(), kappa.is_symmetric(), move |i, j| {
        if i == j {
            0.0
        } else {
            k.evaluate(i, j).powf(iota) * vr.pair_sum(i, j).powf(1.0 - iota)
        }
    }))
}

/// Pointwise sum φ + ψ.
pub fn additive_cost(phi: &CostFunction, psi: &CostFunction) -> Result<CostFunction> {
    check_len(phi.len(), psi.len())?;
    let (a, b) = (phi.clone(), psi.clone());
    Ok(CostFunction::from_fn(
        format!("{}+{}", phi.label(), psi.label()),
        phi.len(),
        phi.is_symmetric() && psi.is_symmetric(),
        move |i, j| a.evaluate(i, j) + b.evaluate(i, j),
    ))
}

/// 2(exp(δ‖x−y‖/2) − 1).
pub fn exp_cost(delta: f64, grid: &Grid) -> Result<CostFunction> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::OutOfRange(format!("delta {delta} must be positive")));
    }
    let g = grid.clone();
    Ok(CostFunction::from_fn(format!("expCost({delta})"), grid.len(), true, move |i, j| {
        2.0 * (0.5 * delta * g.distance(i, j)).exp_m1()
    }))
}

/// ‖x−y‖^p.
pub fn power_metric(p: f64, grid: &Grid) -> Result<CostFunction> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::OutOfRange(format!("p {p} must be positive")));
    }
    let g = grid.clone();
    Ok(CostFunction::from_fn(format!("powerMetric({p})"), grid.len(), true, move |i, j| {
        if i == j {
            0.0
        } else {
            g.distance(i, j).powf(p)
        }
    }))
}

/// Complete metric blowing up at the domain boundary.
///
/// * interval `(a, b)`: |1/(x−a) − 1/(y−a)|^ι + |1/(b−x) − 1/(b−y)|^ι
/// * half-line: |1/x − 1/y|^ι + |x − y|
/// * box: |1/d(x) − 1/d(y)|^ι + ‖x − y‖^ι with d the distance to the boundary
pub fn boundary_metric(iota: f64, grid: &Grid) -> Result<CostFunction> {
    if !(iota > 0.0 && iota <= 1.0) {
        return Err(Error::OutOfRange(format!("iota {iota} not in (0,1]")));
    }
    let domain = grid.domain().clone();
    let n = grid.len();
    let mut inv = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.point(i);
        let d = domain.boundary_distance(x);
        if !(d > 0.0) {
            return Err(Error::SingularCost(i));
        }
        inv.push(match &domain {
            DomainTag::OpenInterval { a, b } => [1.0 / (x[0] - a), 1.0 / (b - x[0])],
            DomainTag::HalfLineTruncated { .. } => [1.0 / x[0], 0.0],
            DomainTag::Box { .. } => [1.0 / d, 0.0],
        });
    }
    let g = grid.clone();
    let label = format!("boundaryMetric({iota})");
    Ok(CostFunction::from_fn(label, n, true, move |i, j| {
        if i == j {
            return 0.0;
        }
        let (u, w) = (inv[i], inv[j]);
        match domain {
            DomainTag::OpenInterval { .. } => (u[0] - w[0]).abs().powf(iota) + (u[1] - w[1]).abs().powf(iota),
            DomainTag::HalfLineTruncated { .. } => (u[0] - w[0]).abs().powf(iota) + (g.coord(i) - g.coord(j)).abs(),
            DomainTag::Box { .. } => {
                (u[0] - w[0]).abs().powf(iota) + euclid(g.point(i), g.point(j)).powf(iota)
            }
        }
    }))
}

/// Outcome of [`validate_cost`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    /// max_{i≠j} φ(i,j)/(V(i)+V(j)); a lower bound for the continuum ‖φ/ϖ_V‖.
    pub ratio_to_varpi: f64,
    pub ratio_witness: Option<(usize, usize)>,
    pub zero_diagonal: bool,
    pub positive_off_diagonal: bool,
    pub symmetric: bool,
    pub symmetric_flag_consistent: bool,
    pub violations: Vec<(usize, usize)>,
}

impl CostReport {
    pub fn is_semi_distance(&self) -> bool {
        self.zero_diagonal && self.positive_off_diagonal
    }
}

/// Checks the semi-distance axioms and the grid surrogate of ‖φ/ϖ_V‖.
pub fn validate_cost(phi: &CostFunction, v: &WeightFunction) -> Result<CostReport> {
    check_len(phi.len(), v.len())?;
    let n = phi.len();
    let mut report = CostReport {
        ratio_to_varpi: 0.0,
        ratio_witness: None,
        zero_diagonal: true,
        positive_off_diagonal: true,
        symmetric: true,
        symmetric_flag_consistent: true,
        violations: Vec::new(),
    };
    for i in 0..n {
        for j in 0..n {
            let c = phi.evaluate(i, j);
            if i == j {
                if c != 0.0 {
                    report.zero_diagonal = false;
                    report.violations.push((i, j));
                }
                continue;
            }
            if !(c > 0.0 && c.is_finite()) {
                report.positive_off_diagonal = false;
                report.violations.push((i, j));
            }
            let ratio = c / v.pair_sum(i, j);
            if ratio > report.ratio_to_varpi || report.ratio_witness.is_none() {
                report.ratio_to_varpi = ratio;
                report.ratio_witness = Some((i, j));
            }
            if j < i && c != phi.evaluate(j, i) {
                report.symmetric = false;
            }
        }
    }
    report.symmetric_flag_consistent = !phi.is_symmetric() || report.symmetric;
    Ok(report)
}

/// Serializable cost selection, tagged by label with a parameter object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", content = "params")]
pub enum CostSpec {
    #[serde(rename = "phi0")]
    Phi0,
    /// φ_V for the experiment's weight function.
    #[serde(rename = "phiV")]
    PhiV,
    #[serde(rename = "phiRho")]
    PhiRho { rho: f64 },
    #[serde(rename = "kappaInterp")]
    KappaInterp { kappa: Box<CostSpec>, rho: f64, iota: f64 },
    #[serde(rename = "expCost")]
    ExpCost { delta: f64 },
    #[serde(rename = "powerMetric")]
    PowerMetric { p: f64 },
    #[serde(rename = "boundaryMetric")]
    BoundaryMetric { iota: f64 },
    #[serde(rename = "additive")]
    Additive { left: Box<CostSpec>, right: Box<CostSpec> },
}

impl CostSpec {
    /// Builds the cost on `grid`; weight-dependent costs use `v`.
    pub fn build(&self, grid: &Grid, v: Option<&WeightFunction>) -> Result<CostFunction> {
        let need_v = || v.ok_or_else(|| Error::Config("this cost needs a weight function".into()));
        match self {
            CostSpec::Phi0 => Ok(discrete_metric(grid.len())),
            CostSpec::PhiV => Ok(weighted_discrete(need_v()?)),
            CostSpec::PhiRho { rho } => Ok(rho_family(need_v()?, *rho)?.phi_rho),
            CostSpec::KappaInterp { kappa, rho, iota } => {
                kappa_interp(&kappa.build(grid, v)?, need_v()?, *rho, *iota)
            }
            CostSpec::ExpCost { delta } => exp_cost(*delta, grid),
            CostSpec::PowerMetric { p } => power_metric(*p, grid),
            CostSpec::BoundaryMetric { iota } => boundary_metric(*iota, grid),
            CostSpec::Additive { left, right } => additive_cost(&left.build(grid, v)?, &right.build(grid, v)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(xs: &[f64]) -> Grid {
        let pts = xs.iter().map(|&x| vec![x]).collect();
        Grid::from_parts(pts, vec![1.0; xs.len()], DomainTag::OpenInterval { a: -100.0, b: 100.0 }).unwrap()
    }

    #[test]
    fn discrete_and_weighted() {
        let d = discrete_metric(3);
        assert_eq!(d.evaluate(1, 1), 0.0);
        assert_eq!(d.evaluate(0, 2), 1.0);
        assert!(d.is_symmetric());
        let v = WeightFunction::new(vec![1.0, 3.0]).unwrap();
        let w = weighted_discrete(&v);
        assert_eq!(w.evaluate(0, 1), 4.0);
        assert_eq!(w.evaluate(0, 0), 0.0);
        let k = weighted_discrete(&WeightFunction::constant(2, 2.5).unwrap());
        assert_eq!(k.evaluate(1, 0), 5.0);
    }

    #[test]
    fn rho_family_values() {
        let v = WeightFunction::new(vec![0.5, 1.5]).unwrap();
        let f = rho_family(&v, 1.0).unwrap();
        assert_eq!(f.varpi(0, 1), 3.0);
        assert_eq!(f.phi_rho.evaluate(0, 0), 0.0);
        assert_eq!(f.phi_rho.evaluate(0, 1), 3.0);
        let pv = v.pair_sum(0, 1);
        assert!(1.0 * pv <= f.varpi(0, 1) && f.varpi(0, 1) <= 2.0 * pv);
    }

    #[test]
    fn interpolated_cost() {
        let v = WeightFunction::new(vec![0.5, 1.5]).unwrap();
        let k = kappa_interp(&discrete_metric(2), &v, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(k.evaluate(0, 1), 3f64.sqrt(), epsilon = 1e-15);
        let same = kappa_interp(&discrete_metric(2), &v, 1.0, 1.0).unwrap();
        assert_eq!(same.evaluate(0, 1), 1.0);
        let zero = kappa_interp(&discrete_metric(2), &v, 1.0, 0.0).unwrap();
        assert_eq!(zero.evaluate(1, 1), 0.0);
        assert_eq!(zero.evaluate(1, 0), 3.0);
    }

    #[test]
    fn additive_and_metric_costs() {
        let g = line(&[0.0, 1.0]);
        let two = additive_cost(&discrete_metric(2), &discrete_metric(2)).unwrap();
        assert_eq!(two.evaluate(0, 1), 2.0);
        assert_eq!(two.evaluate(1, 1), 0.0);
        let v = WeightFunction::new(vec![1.0, 3.0]).unwrap();
        let s = additive_cost(&power_metric(1.0, &g).unwrap(), &weighted_discrete(&v)).unwrap();
        assert_eq!(s.evaluate(0, 1), 5.0);

        let g = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let e = exp_cost(2.0, &g).unwrap();
        assert_abs_diff_eq!(e.evaluate(0, 1), 3.436_563_656_918_09, epsilon = 1e-12);
        assert_abs_diff_eq!(e.evaluate(0, 2), 12.778_112_197_861_3, epsilon = 1e-12);
        assert_eq!(e.evaluate(3, 3), 0.0);
        assert_eq!(power_metric(2.0, &g).unwrap().evaluate(0, 3), 9.0);
        assert_eq!(power_metric(0.5, &g).unwrap().evaluate(0, 4), 2.0);
        assert_eq!(power_metric(1.0, &g).unwrap().evaluate(2, 2), 0.0);
    }

    #[test]
    fn boundary_metrics() {
        let g = Grid::from_parts(vec![vec![0.25], vec![0.5]], vec![0.5, 0.5], DomainTag::OpenInterval { a: 0.0, b: 1.0 })
            .unwrap();
        let b = boundary_metric(1.0, &g).unwrap();
        assert_abs_diff_eq!(b.evaluate(0, 1), 8.0 / 3.0, epsilon = 1e-14);
        assert_eq!(b.evaluate(1, 1), 0.0);

        let h = Grid::from_parts(
            vec![vec![1.0], vec![4.0]],
            vec![1.0, 1.0],
            DomainTag::HalfLineTruncated { x_min: 0.5, x_max: 5.0 },
        )
        .unwrap();
        let b = boundary_metric(0.5, &h).unwrap();
        assert_abs_diff_eq!(b.evaluate(0, 1), 0.75f64.sqrt() + 3.0, epsilon = 1e-14);

        let bx = Grid::build(DomainTag::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }, 3).unwrap();
        let c = boundary_metric(0.5, &bx).unwrap();
        let r = validate_cost(&c, &WeightFunction::constant(9, 1.0).unwrap()).unwrap();
        assert!(r.is_semi_distance() && r.symmetric);
    }

    #[test]
    fn boundary_metric_rejects_bad_exponent() {
        let half = Grid::from_parts(
            vec![vec![0.5], vec![1.0]],
            vec![1.0, 1.0],
            DomainTag::HalfLineTruncated { x_min: 0.25, x_max: 2.0 },
        )
        .unwrap();
        assert!(matches!(boundary_metric(1.5, &half), Err(Error::OutOfRange(_))));
        assert!(matches!(boundary_metric(0.0, &half), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn validation_report() {
        let v = WeightFunction::new(vec![0.5, 1.0, 2.0]).unwrap();
        let r = validate_cost(&weighted_discrete(&v), &v).unwrap();
        assert_eq!(r.ratio_to_varpi, 1.0);
        let r = validate_cost(&discrete_metric(3), &v).unwrap();
        assert!(r.ratio_to_varpi <= 1.0);
        let bad = CostFunction::from_matrix("bad", 2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let r = validate_cost(&bad, &WeightFunction::constant(2, 1.0).unwrap()).unwrap();
        assert!(!r.positive_off_diagonal);
        assert_eq!(r.violations, vec![(0, 1)]);
        assert!(!r.symmetric);
    }

    #[test]
    fn spec_round_trip() {
        let s: CostSpec = serde_json::from_str(r#"{"label": "phi0"}"#).unwrap();
        assert_eq!(s, CostSpec::Phi0);
        let s: CostSpec =
            serde_json::from_str(r#"{"label": "kappaInterp", "params": {"kappa": {"label": "powerMetric", "params": {"p": 1}}, "rho": 0.1, "iota": 0.5}}"#)
                .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<CostSpec>(&text).unwrap(), s);
        let g = line(&[0.0, 1.0]);
        let v = WeightFunction::new(vec![1.0, 1.0]).unwrap();
        let c = s.build(&g, Some(&v)).unwrap();
        assert_abs_diff_eq!(c.evaluate(0, 1), (1.2f64).sqrt(), epsilon = 1e-14);
        assert!(CostSpec::PhiV.build(&g, None).is_err());
    }
}
