//! Row-stochastic kernels on grids and the example model families.

mod builders;
mod gibbs;
mod spec;

use ndarray::{Array2, ArrayView1};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::measures::{DiscreteMeasure, WeightFunction};

pub use builders::{
    build_arcsine_kernel, build_deterministic_kernel, build_halfline_kernel, build_irf_kernel,
    build_langevin_kernel, build_unit_interval_kernel, gaussian_q_kernel, AffineMap, IrfModel, NoiseSpec, Potential,
};
pub use gibbs::{build_gibbs_pair, GibbsModel, GibbsPair, GibbsParams};
pub use spec::{BuiltModel, ModelSpec};

/// Row sums must equal 1 within this tolerance.
pub const ROW_TOL: f64 = 1e-10;

/// How a kernel's rows were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Given directly as a matrix.
    Explicit,
    /// Closed-form integrals of the density over each cell.
    ExactCellIntegration,
    /// Point masses assigned to cells.
    Atomic,
    /// Products or powers of other kernels.
    Algebraic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    pub construction: Construction,
    /// Largest row mass that fell outside the grid and was moved to a
    /// boundary cell.
    pub clamped_fraction: f64,
    /// Set when `clamped_fraction` exceeds 1e-3.
    pub truncation_warning: bool,
}

impl KernelDiagnostics {
    pub fn new(construction: Construction, clamped_fraction: f64) -> Self {
        KernelDiagnostics { construction, clamped_fraction, truncation_warning: clamped_fraction > 1e-3 }
    }
}

/// A Markov kernel on `n` grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    rows: Array2<f64>,
    model_tag: String,
    diagnostics: KernelDiagnostics,
}

impl KernelMatrix {
    /// Validates squareness, non-negativity and unit row sums.
    pub fn new(rows: Array2<f64>, model_tag: impl Into<String>) -> Result<Self> {
        let (n, k) = rows.dim();
        if n != k || n == 0 {
            return Err(Error::InvalidKernel(format!("kernel must be square and non-empty, got {n}x{k}")));
        }
        for (i, row) in rows.outer_iter().enumerate() {
            if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidKernel(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidKernel(format!("row {i} sums to {s}")));
            }
        }
        let rows = rows.as_standard_layout().into_owned();
        Ok(KernelMatrix { rows, model_tag: model_tag.into(), diagnostics: KernelDiagnostics::new(Construction::Explicit, 0.0) })
    }

    /// Normalizes each row to unit mass; zero rows are an error.
    pub fn from_unnormalized(mut rows: Array2<f64>, model_tag: impl Into<String>) -> Result<Self> {
        for (i, mut row) in rows.outer_iter_mut().enumerate() {
            let s: f64 = row.sum();
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidKernel(format!("row {i} has mass {s}")));
            }
            row.mapv_inplace(|x| x / s);
        }
        Self::new(rows, model_tag)
    }

    pub fn from_rows(rows: &[Vec<f64>], model_tag: impl Into<String>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel("rows must all have length equal to their count".into()));
        }
        let flat: Vec<f64> = rows.concat();
        let a = Array2::from_shape_vec((n, n), flat).map_err(|e| Error::InvalidKernel(e.to_string()))?;
        Self::new(a, model_tag)
    }

    pub fn identity(n: usize) -> Self {
        KernelMatrix {
            rows: Array2::eye(n),
            model_tag: "identity".into(),
            diagnostics: KernelDiagnostics::new(Construction::Explicit, 0.0),
        }
    }

    /// Every row equal to `mu`.
    pub fn constant_rows(mu: &DiscreteMeasure) -> Self {
        let n = mu.len();
        let mut rows = Array2::zeros((n, n));
        for mut r in rows.outer_iter_mut() {
            r.assign(&ArrayView1::from(mu.weights()));
        }
        KernelMatrix { rows, model_tag: "constant_rows".into(), diagnostics: KernelDiagnostics::new(Construction::Explicit, 0.0) }
    }

    pub(crate) fn with_diagnostics(mut self, d: KernelDiagnostics) -> Self {
        self.diagnostics = d;
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.model_tag = tag.into();
        self
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    /// Row `i` as a slice, i.e. the measure δ_i P.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.rows.as_slice().expect("standard layout")[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[[i, j]]
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn diagnostics(&self) -> &KernelDiagnostics {
        &self.diagnostics
    }

    /// Matrix product `self · other` (apply `self` first).
    pub fn compose(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        check_len(self.len(), other.len())?;
        Ok(self.product_unchecked(other, format!("{}*{}", self.model_tag, other.model_tag)))
    }

    fn product_unchecked(&self, other: &KernelMatrix, tag: String) -> KernelMatrix {
        let mut rows = self.rows.dot(&other.rows);
        // Remove rounding drift so products stay exactly stochastic.
        for mut r in rows.outer_iter_mut() {
            r.mapv_inplace(|x| x.max(0.0));
            let s = r.sum();
            r.mapv_inplace(|x| x / s);
        }
        KernelMatrix { rows, model_tag: tag, diagnostics: KernelDiagnostics::new(Construction::Algebraic, 0.0) }
    }
}

/// μP.
pub fn left_action(mu: &DiscreteMeasure, p: &KernelMatrix) -> Result<DiscreteMeasure> {
    check_len(p.len(), mu.len())?;
    DiscreteMeasure::normalized(left_action_raw(mu.weights(), p))
}

pub(crate) fn left_action_raw(mu: &[f64], p: &KernelMatrix) -> Vec<f64> {
    let out = ArrayView1::from(mu).dot(p.rows());
    out.into_iter().map(|x| x.max(0.0)).collect()
}

/// P(f).
pub fn right_action(p: &KernelMatrix, f: &[f64]) -> Result<Vec<f64>> {
    check_len(p.len(), f.len())?;
    Ok(p.rows().dot(&ArrayView1::from(f)).to_vec())
}

/// P_n by repeated squaring; P_0 is the identity.
pub fn power(p: &KernelMatrix, n: usize) -> KernelMatrix {
    let tag = format!("{}^{}", p.model_tag(), n);
    let mut result: Option<KernelMatrix> = None;
    let mut base = p.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.product_unchecked(&base, String::new()),
            });
        }
        k >>= 1;
        if k > 0 {
            base = base.product_unchecked(&base, String::new());
        }
    }
    match result {
        Some(r) => r.with_tag(tag),
        None => KernelMatrix::identity(p.len()).with_tag(tag),
    }
}

/// |||P|||_{op,V} = max P(V)/V.
pub fn op_norm_v(p: &KernelMatrix, v: &WeightFunction) -> Result<f64> {
    op_norm_vw(p, v, v)
}

/// |||K|||_{V,W} = max K(W)/V.
pub fn op_norm_vw(k: &KernelMatrix, v: &WeightFunction, w: &WeightFunction) -> Result<f64> {
    check_len(k.len(), v.len())?;
    let kw = right_action(k, w.values())?;
    Ok(kw.iter().zip(v.values()).map(|(a, b)| a / b).fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn two_state() -> KernelMatrix {
        KernelMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], "two_state").unwrap()
    }

    fn uniform3() -> KernelMatrix {
        KernelMatrix::constant_rows(&DiscreteMeasure::uniform(3))
    }

    #[test]
    fn actions() {
        let p = two_state();
        let mu = left_action(&DiscreteMeasure::dirac(2, 1), &p).unwrap();
        assert_eq!(mu.weights(), p.row(1));
        let mu = left_action(&DiscreteMeasure::uniform(2), &p).unwrap();
        assert_abs_diff_eq!(mu.weights()[0], 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(mu.weights()[1], 0.45, epsilon = 1e-15);
        let u = left_action(&DiscreteMeasure::uniform(3), &uniform3()).unwrap();
        assert_abs_diff_eq!(u.weights()[2], 1.0 / 3.0, epsilon = 1e-15);

        assert_eq!(right_action(&p, &[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(right_action(&p, &[0.0, 1.0]).unwrap(), vec![0.1, 0.8]);
        let pv = right_action(&uniform3(), &[1.0, 2.0, 4.0]).unwrap();
        assert!(pv.iter().all(|x| (x - 7.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn powers() {
        let p = two_state();
        assert_eq!(power(&p, 0).rows(), KernelMatrix::identity(2).rows());
        assert_eq!(power(&p, 1).rows(), p.rows());
        let p2 = power(&p, 2);
        assert_abs_diff_eq!(p2.get(0, 0), 0.83, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.get(0, 1), 0.17, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.get(1, 0), 0.34, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.get(1, 1), 0.66, epsilon = 1e-15);
    }

    #[test]
    fn operator_norms() {
        let v = WeightFunction::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(op_norm_v(&uniform3(), &v).unwrap(), 7.0 / 3.0, epsilon = 1e-15);
        assert_eq!(op_norm_v(&KernelMatrix::identity(3), &v).unwrap(), 1.0);
        let c = WeightFunction::constant(3, 5.0).unwrap();
        assert_abs_diff_eq!(op_norm_v(&uniform3(), &c).unwrap(), 1.0, epsilon = 1e-15);
        let w = WeightFunction::new(vec![2.0, 4.0, 8.0]).unwrap();
        assert_eq!(op_norm_vw(&KernelMatrix::identity(3), &v, &w).unwrap(), 2.0);
    }

    #[test]
    fn rejects_non_stochastic() {
        assert!(KernelMatrix::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]], "x").is_err());
        assert!(KernelMatrix::from_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]], "x").is_err());
    }
}
