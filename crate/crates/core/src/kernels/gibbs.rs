//! Two-block Gibbs transitions built from Boltzmann–Gibbs potentials.
//!
//! With ν_g = e^{−g}ν, ν_h = e^{−h}ν and M(y, x) = e^{−m(y,x)}ν(x), the
//! transitions are K = M*_{ν_h} (the ν_h-adjoint of M) and L = K*_{ν_g},
//! so that ν_h M K = ν_h and ν_g K L = ν_g.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Construction, KernelDiagnostics, KernelMatrix};
use crate::error::{check_len, Error, Result};
use crate::measures::{Grid, WeightFunction};

/// Normalization tolerance for the potentials.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsModel {
    /// Positive base weights ν.
    pub nu: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// m[[y, x]].
    pub m: Array2<f64>,
    pub delta: f64,
}

/// Gaussian-type potentials on a grid with counting base measure:
/// g ∝ a_g x²/2, h ∝ a_h y²/2, m(y, ·) ∝ (x − κy)²/(2s²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    #[serde(default = "one")]
    pub a_g: f64,
    #[serde(default = "one")]
    pub a_h: f64,
    #[serde(default = "half")]
    pub coupling: f64,
    #[serde(default = "one")]
    pub s: f64,
    #[serde(default = "quarter")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}

impl Default for GibbsParams {
    fn default() -> Self {
        GibbsParams { a_g: 1.0, a_h: 1.0, coupling: 0.5, s: 1.0, delta: 0.25 }
    }
}

fn log_sum_exp(neg: impl Iterator<Item = f64> + Clone) -> f64 {
    let mx = neg.clone().fold(f64::NEG_INFINITY, f64::max);
    mx + neg.map(|v| (v - mx).exp()).sum::<f64>().ln()
}

impl GibbsModel {
    pub fn new(nu: Vec<f64>, g: Vec<f64>, h: Vec<f64>, m: Array2<f64>, delta: f64) -> Result<Self> {
        let n = nu.len();
        check_len(n, g.len())?;
        check_len(n, h.len())?;
        if m.dim() != (n, n) {
            return Err(Error::ModelInvariant(format!("m must be {n}x{n}")));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::ModelInvariant(format!("delta {delta} not in (0, 1/2)")));
        }
        if nu.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::ModelInvariant("base weights must be positive".into()));
        }
        if g.iter().chain(&h).chain(m.iter()).any(|v| !v.is_finite()) {
            return Err(Error::ModelInvariant("potentials must be finite".into()));
        }
        let mass = |p: &[f64]| p.iter().zip(&nu).map(|(p, w)| (-p).exp() * w).sum::<f64>();
        for (name, p) in [("g", &g), ("h", &h)] {
            let s = mass(p);
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::ModelInvariant(format!("exp(-{name}) nu has mass {s}")));
            }
        }
        for (y, row) in m.outer_iter().enumerate() {
            let s = mass(row.as_slice().expect("standard layout"));
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::ModelInvariant(format!("exp(-m({y}, .)) nu has mass {s}")));
            }
        }
        Ok(GibbsModel { nu, g, h, m: m.as_standard_layout().into_owned(), delta })
    }

    /// Normalizes raw potentials (adds log-partition constants) and builds
    /// the model.
    pub fn from_raw(nu: Vec<f64>, g: Vec<f64>, h: Vec<f64>, mut m: Array2<f64>, delta: f64) -> Result<Self> {
        let logz = |p: &[f64]| log_sum_exp(p.iter().zip(&nu).map(|(p, w)| w.ln() - p));
        let (zg, zh) = (logz(&g), logz(&h));
        let g = g.iter().map(|v| v + zg).collect();
        let h = h.iter().map(|v| v + zh).collect();
        for mut row in m.outer_iter_mut() {
            let z = logz(row.as_slice().expect("standard layout"));
            row.mapv_inplace(|v| v + z);
        }
        Self::new(nu, g, h, m, delta)
    }

    /// Quadratic potentials on a 1-D grid, counting base measure.
    pub fn quadratic(grid: &Grid, p: &GibbsParams) -> Result<Self> {
        let xs: Vec<f64> = grid.coords().collect();
        let n = xs.len();
        if !(p.s > 0.0 && p.a_g > 0.0 && p.a_h > 0.0) {
            return Err(Error::Config("Gibbs parameters a_g, a_h, s must be positive".into()));
        }
        let g = xs.iter().map(|x| 0.5 * p.a_g * x * x).collect();
        let h = xs.iter().map(|y| 0.5 * p.a_h * y * y).collect();
        let m = Array2::from_shape_fn((n, n), |(y, x)| (xs[x] - p.coupling * xs[y]).powi(2) / (2.0 * p.s * p.s));
        Self::from_raw(vec![1.0; n], g, h, m, p.delta)
    }

    /// Random model on `n` points. With `counting` the base measure is all
    /// ones; otherwise weights are drawn from [0.5, 2].
    pub fn random<R: Rng + ?Sized>(n: usize, delta: f64, counting: bool, rng: &mut R) -> Result<Self> {
        let nu = (0..n).map(|_| if counting { 1.0 } else { rng.random_range(0.5..2.0) }).collect();
        let g = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let h = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let m = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..2.0));
        Self::from_raw(nu, g, h, m, delta)
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// ν_g as weights.
    pub fn nu_g(&self) -> Vec<f64> {
        self.g.iter().zip(&self.nu).map(|(g, w)| (-g).exp() * w).collect()
    }

    /// ν_h as weights.
    pub fn nu_h(&self) -> Vec<f64> {
        self.h.iter().zip(&self.nu).map(|(h, w)| (-h).exp() * w).collect()
    }

    /// m⁻ = min m.
    pub fn m_min(&self) -> f64 {
        self.m.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The Gibbs transitions with the quantities entering their Lyapunov bounds.
#[derive(Debug, Clone)]
pub struct GibbsPair {
    pub m_kernel: KernelMatrix,
    pub k: KernelMatrix,
    pub l: KernelMatrix,
    /// m_g(y) = Σ_z ν_g(z) m(y, z).
    pub m_g: Vec<f64>,
    /// m_h(x) = Σ_z ν_h(z) m(z, x).
    pub m_h: Vec<f64>,
    /// δg − m_h.
    pub g_delta: Vec<f64>,
    /// δh − m_g.
    pub h_delta: Vec<f64>,
    /// e^{−m⁻}·ν_{(1−δ)h}(1).
    pub c_delta_h: f64,
    /// ν_{(1−2δ)g}(1)·exp(−g_δ⁻ − ν_g(g)), times e^{−m⁻} when m⁻ < 0.
    pub c_delta_g: f64,
    /// V = e^{δg} on the x-block.
    pub v: WeightFunction,
    /// W = e^{δh} on the y-block.
    pub w: WeightFunction,
}

pub fn build_gibbs_pair(model: &GibbsModel) -> Result<GibbsPair> {
    let n = model.len();
    let delta = model.delta;
    let nu_g = model.nu_g();
    let nu_h = model.nu_h();
    let m = &model.m;

    let mk = Array2::from_shape_fn((n, n), |(y, x)| (-m[[y, x]]).exp() * model.nu[x]);
    let m_kernel = KernelMatrix::from_unnormalized(mk, "gibbs_M")?;

    // d(ν_h M)/dν (x) = Σ_y ν_h(y) e^{−m(y,x)}.
    let dens: Vec<f64> = (0..n).map(|x| (0..n).map(|y| nu_h[y] * (-m[[y, x]]).exp()).sum()).collect();
    let k = Array2::from_shape_fn((n, n), |(x, y)| nu_h[y] * (-m[[y, x]]).exp() / dens[x]);
    let k = KernelMatrix::from_unnormalized(k, "gibbs_K")?;

    // f = dν_g / d(ν_h M) and L(y, x) = M(y, x) f(x) / M(f)(y).
    let f: Vec<f64> = (0..n).map(|x| nu_g[x] / (model.nu[x] * dens[x])).collect();
    let l = Array2::from_shape_fn((n, n), |(y, x)| (-m[[y, x]]).exp() * model.nu[x] * f[x]);
    let l = KernelMatrix::from_unnormalized(l, "gibbs_L")?;

    let m_h: Vec<f64> = (0..n).map(|x| (0..n).map(|z| nu_h[z] * m[[z, x]]).sum()).collect();
    let m_g: Vec<f64> = (0..n).map(|y| (0..n).map(|z| nu_g[z] * m[[y, z]]).sum()).collect();
    let g_delta: Vec<f64> = (0..n).map(|x| delta * model.g[x] - m_h[x]).collect();
    let h_delta: Vec<f64> = (0..n).map(|y| delta * model.h[y] - m_g[y]).collect();

    let m_min = model.m_min();
    let g_delta_min = g_delta.iter().copied().fold(f64::INFINITY, f64::min);
    let nu_g_g: f64 = nu_g.iter().zip(&model.g).map(|(w, g)| w * g).sum();
    let tilted = |p: &[f64], t: f64| p.iter().zip(&model.nu).map(|(p, w)| (-t * p).exp() * w).sum::<f64>();
    let c_delta_h = (-m_min).exp() * tilted(&model.h, 1.0 - delta);
    let c_delta_g = tilted(&model.g, 1.0 - 2.0 * delta) * (-g_delta_min - nu_g_g - m_min.min(0.0)).exp();

    let v = WeightFunction::new(model.g.iter().map(|g| (delta * g).exp()).collect())?.with_label("exp(delta g)");
    let w = WeightFunction::new(model.h.iter().map(|h| (delta * h).exp()).collect())?.with_label("exp(delta h)");
    let diag = KernelDiagnostics::new(Construction::ExactCellIntegration, 0.0);
    Ok(GibbsPair {
        m_kernel: m_kernel.with_diagnostics(diag.clone()),
        k: k.with_diagnostics(diag.clone()),
        l: l.with_diagnostics(diag),
        m_g,
        m_h,
        g_delta,
        h_delta,
        c_delta_h,
        c_delta_g,
        v,
        w,
    })
}

impl GibbsPair {
    /// P = KL on the x-block.
    pub fn product(&self) -> Result<KernelMatrix> {
        Ok(self.k.compose(&self.l)?.with_tag("gibbs_KL"))
    }

    /// Smallest slack of e^{−δg}K(e^{δh}) ≤ c_{δ,h} e^{−g_δ} over grid points.
    pub fn h2g_slack(&self, model: &GibbsModel) -> Result<f64> {
        let kw = super::right_action(&self.k, self.w.values())?;
        Ok((0..model.len())
            .map(|x| self.c_delta_h * (-self.g_delta[x]).exp() - (-model.delta * model.g[x]).exp() * kw[x])
            .fold(f64::INFINITY, f64::min))
    }

    /// Smallest slack of e^{−δh}L(e^{δg}) ≤ c_{δ,g} e^{−h_δ} over grid points.
    pub fn g2h_slack(&self, model: &GibbsModel) -> Result<f64> {
        let lv = super::right_action(&self.l, self.v.values())?;
        Ok((0..model.len())
            .map(|y| self.c_delta_g * (-self.h_delta[y]).exp() - (-model.delta * model.h[y]).exp() * lv[y])
            .fold(f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::left_action_raw;
    use crate::measures::half_l1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_potential_makes_k_independent() {
        let n = 5;
        let m = Array2::from_elem((n, n), (n as f64).ln());
        let model = GibbsModel::from_raw(vec![1.0; n], vec![0.3, 0.1, 0.7, 0.2, 0.9], vec![0.0; n], m, 0.25).unwrap();
        let pair = build_gibbs_pair(&model).unwrap();
        let nu_h = model.nu_h();
        for x in 0..n {
            for y in 0..n {
                assert!((pair.k.get(x, y) - nu_h[y]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn duality_and_lyapunov_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let model = GibbsModel::random(6, 0.3, trial % 2 == 0, &mut rng).unwrap();
            let pair = build_gibbs_pair(&model).unwrap();
            let nu_h = model.nu_h();
            let nu_g = model.nu_g();
            let mk = pair.m_kernel.compose(&pair.k).unwrap();
            assert!(half_l1(&left_action_raw(&nu_h, &mk), &nu_h) < 1e-12);
            let kl = pair.product().unwrap();
            assert!(half_l1(&left_action_raw(&nu_g, &kl), &nu_g) < 1e-12);
            assert!(pair.h2g_slack(&model).unwrap() >= 0.0);
            assert!(pair.g2h_slack(&model).unwrap() >= 0.0);
        }
    }

    #[test]
    fn rejects_unnormalized_inputs() {
        let m = Array2::from_elem((2, 2), 0.0);
        assert!(matches!(
            GibbsModel::new(vec![1.0; 2], vec![0.0; 2], vec![0.0; 2], m, 0.25),
            Err(Error::ModelInvariant(_))
        ));
    }
}
