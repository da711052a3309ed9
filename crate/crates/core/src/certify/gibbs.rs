//! Local minorization of the two Gibbs transitions.

use serde::Serialize;

use super::{minorize_rows, sublevel};
use crate::error::{check_len, Result};
use crate::kernels::{GibbsModel, GibbsPair};

/// Minorization constants of K on C_V(r) and L on C_W(r).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsMinorization {
    pub r: f64,
    /// a(r) = m⁻ − sup_{C_V × C_W} m.
    pub a: f64,
    /// b(r) = g_δ⁻ − sup_{C_V × C_W} m.
    pub b: f64,
    /// e^{a(r)} ν_h(C_W(r)).
    pub alpha_h: f64,
    /// ν_g(C_V(r)) e^{b(r) + 2 min(m⁻, 0)} / ν_{(1−δ)g}(1).
    pub alpha_g: f64,
    /// min(α_h, α_g).
    pub alpha_closed_form: f64,
    /// Σ_{y ∈ C_W} min_{x ∈ C_V} K(x, y).
    pub alpha_direct_k: f64,
    /// Σ_{x ∈ C_V} min_{y ∈ C_W} L(y, x).
    pub alpha_direct_l: f64,
    /// min of the two direct constants.
    pub alpha_direct: f64,
    /// Unrestricted entrywise infima, Σ_y min_{x ∈ C_V} K(x, y) and the same for L.
    pub alpha_full_k: f64,
    pub alpha_full_l: f64,
    /// ν_g restricted to C_V(r) and normalized.
    pub nu_g_r: Vec<f64>,
    /// ν_h restricted to C_W(r) and normalized.
    pub nu_h_r: Vec<f64>,
    pub c_v: Vec<usize>,
    pub c_w: Vec<usize>,
}

/// Restriction of `w` to `idx`, normalized, together with its mass.
fn restrict(w: &[f64], idx: &[usize]) -> (Vec<f64>, f64) {
    let mass: f64 = idx.iter().map(|&i| w[i]).sum();
    let mut out = vec![0.0; w.len()];
    for &i in idx {
        out[i] = w[i] / mass;
    }
    (out, mass)
}

/// Closed-form constants α_h(r), α_g(r) next to the direct entrywise
/// infima over the same level sets.
///
/// The bound for L carries an extra factor e^{2 min(m⁻, 0)}: both the
/// lower bound on the numerator of L and the upper bound on its
/// normalizer need e^{−m} ≤ e^{−m⁻}, which costs e^{m⁻} each when m⁻ < 0.
pub fn gibbs_minorization(model: &GibbsModel, pair: &GibbsPair, r: f64) -> Result<GibbsMinorization> {
    let n = model.len();
    check_len(n, pair.k.len())?;
    let c_v = sublevel(&pair.v, r)?;
    let c_w = sublevel(&pair.w, r)?;
    let nu_g = model.nu_g();
    let nu_h = model.nu_h();

    let m_min = model.m_min();
    let m_sup = c_v.iter().flat_map(|&x| c_w.iter().map(move |&y| model.m[[y, x]])).fold(f64::NEG_INFINITY, f64::max);
    let g_delta_min = pair.g_delta.iter().copied().fold(f64::INFINITY, f64::min);
    let a = m_min - m_sup;
    let b = g_delta_min - m_sup;
    let (nu_h_r, nu_h_cw) = restrict(&nu_h, &c_w);
    let (nu_g_r, nu_g_cv) = restrict(&nu_g, &c_v);
    let tilted: f64 = model.g.iter().zip(&model.nu).map(|(g, w)| (-(1.0 - model.delta) * g).exp() * w).sum();
    let alpha_h = a.exp() * nu_h_cw;
    let alpha_g = nu_g_cv * (b + 2.0 * m_min.min(0.0)).exp() / tilted;

    let k_min = minorize_rows(&pair.k, c_v.clone(), r);
    let l_min = minorize_rows(&pair.l, c_w.clone(), r);
    let inf_k = k_min.nu_r.as_ref().map(|nu| nu.iter().map(|x| x * k_min.alpha).collect::<Vec<_>>());
    let inf_l = l_min.nu_r.as_ref().map(|nu| nu.iter().map(|x| x * l_min.alpha).collect::<Vec<_>>());
    let on = |q: &Option<Vec<f64>>, idx: &[usize]| q.as_ref().map_or(0.0, |q| idx.iter().map(|&i| q[i]).sum());
    let alpha_direct_k = on(&inf_k, &c_w);
    let alpha_direct_l = on(&inf_l, &c_v);

    Ok(GibbsMinorization {
        r,
        a,
        b,
        alpha_h,
        alpha_g,
        alpha_closed_form: alpha_h.min(alpha_g),
        alpha_direct_k,
        alpha_direct_l,
        alpha_direct: alpha_direct_k.min(alpha_direct_l),
        alpha_full_k: k_min.alpha,
        alpha_full_l: l_min.alpha,
        nu_g_r,
        nu_h_r,
        c_v,
        c_w,
    })
}
