//! Numerical certificates for the geometric drift condition (H1) and the
//! local minorization / local contraction condition (H2).
//!
//! All certificates are exact for the discretized kernel. They say nothing
//! about the continuum beyond what the grid resolves.

mod gibbs;
mod irf;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::kernels::{right_action, KernelMatrix};
use crate::measures::WeightFunction;
use crate::semidistance::CostFunction;
use crate::transport::distance;

pub use gibbs::{gibbs_minorization, GibbsMinorization};
pub use irf::{fit_hyp_fx, irf_lyapunov, HypFx, IrfLyapunov, IrfMode};

/// Relative slack allowed when re-verifying a drift certificate.
pub const DRIFT_SLACK: f64 = 1e-12;
/// Slack allowed when re-verifying a minorization certificate.
pub const MINORIZATION_SLACK: f64 = 1e-12;
/// Slack allowed when re-verifying a local contraction certificate.
pub const CONTRACTION_SLACK: f64 = 1e-9;
/// Largest α reported by local contraction (α = 1 would mean s = 0).
pub const ALPHA_CAP: f64 = 1.0 - 1e-6;

/// {0.05, 0.10, …, 0.95}.
pub fn default_eps_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// How [`certify_drift_with`] picks ε from the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftObjective {
    /// Minimize c/(1−ε), the level beyond which V strictly decreases on
    /// average. The grid optimum is refined locally.
    SmallSet,
    /// Smallest ε whose constant does not exceed `c_max`.
    LargestMargin { c_max: f64 },
    /// Use this ε.
    Fixed { epsilon: f64 },
}

impl Default for DriftObjective {
    fn default() -> Self {
        DriftObjective::SmallSet
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPoint {
    pub epsilon: f64,
    pub c: f64,
}

/// P(V) ≤ εV + c on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftCertificate {
    pub epsilon: f64,
    pub c: f64,
    pub v_label: String,
    /// max_i (P(V)[i] − εV[i] − c).
    pub residual: f64,
    pub objective: DriftObjective,
    /// (ε, c(ε)) for every ε evaluated, sorted by ε.
    pub frontier: Vec<DriftPoint>,
}

impl DriftCertificate {
    /// c/(1−ε).
    pub fn small_set_level(&self) -> f64 {
        self.c / (1.0 - self.epsilon)
    }

    /// Recomputes P(V) from the raw rows and returns the largest residual.
    pub fn recheck(&self, p: &KernelMatrix, v: &WeightFunction) -> Result<f64> {
        check_len(p.len(), v.len())?;
        Ok(naive_residual(p, v.values(), v.values(), self.epsilon, self.c))
    }

    /// True when the recomputed residual is within [`DRIFT_SLACK`] relative
    /// to the size of the right-hand side.
    pub fn verify(&self, p: &KernelMatrix, v: &WeightFunction) -> Result<bool> {
        let res = self.recheck(p, v)?;
        Ok(res <= DRIFT_SLACK * (1.0 + self.epsilon * v.max() + self.c))
    }
}

fn naive_residual(p: &KernelMatrix, lhs_weight: &[f64], rhs_weight: &[f64], eps: f64, c: f64) -> f64 {
    (0..p.len())
        .map(|i| {
            let pv: f64 = p.row(i).iter().zip(lhs_weight).map(|(a, b)| a * b).sum();
            pv - eps * rhs_weight[i] - c
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("epsilon {eps} not in (0,1)")))
    }
}

/// c(ε) = max_i (P(V)[i] − εV[i])₊ from a precomputed P(V).
fn c_of(pv: &[f64], v: &[f64], eps: f64) -> f64 {
    pv.iter().zip(v).map(|(a, b)| a - eps * b).fold(0.0, f64::max)
}

/// max_i (P(V)[i] − εV[i])₊.
pub fn drift_constant(p: &KernelMatrix, v: &WeightFunction, epsilon: f64) -> Result<f64> {
    check_eps(epsilon)?;
    Ok(c_of(&right_action(p, v.values())?, v.values(), epsilon))
}

/// [`certify_drift_with`] under the default objective.
pub fn certify_drift(p: &KernelMatrix, v: &WeightFunction, eps_grid: &[f64]) -> Result<DriftCertificate> {
    certify_drift_with(p, v, eps_grid, DriftObjective::default())
}

pub fn certify_drift_with(
    p: &KernelMatrix,
    v: &WeightFunction,
    eps_grid: &[f64],
    objective: DriftObjective,
) -> Result<DriftCertificate> {
    let pv = right_action(p, v.values())?;
    let (epsilon, c, frontier) = select(&pv, v.values(), eps_grid, objective)?;
    let residual = pv.iter().zip(v.values()).map(|(a, b)| a - epsilon * b - c).fold(f64::NEG_INFINITY, f64::max);
    Ok(DriftCertificate { epsilon, c, v_label: v.label().to_string(), residual, objective, frontier })
}

fn select(pv: &[f64], v: &[f64], eps_grid: &[f64], objective: DriftObjective) -> Result<(f64, f64, Vec<DriftPoint>)> {
    for &e in eps_grid {
        check_eps(e)?;
    }
    let point = |epsilon: f64| DriftPoint { epsilon, c: c_of(pv, v, epsilon) };
    let mut frontier: Vec<DriftPoint> = eps_grid.iter().map(|&e| point(e)).collect();
    let chosen = match objective {
        DriftObjective::Fixed { epsilon } => {
            check_eps(epsilon)?;
            let p = point(epsilon);
            frontier.push(p);
            p
        }
        DriftObjective::SmallSet => {
            let level = |p: &DriftPoint| p.c / (1.0 - p.epsilon);
            let best = frontier
                .iter()
                .copied()
                .min_by(|a, b| level(a).total_cmp(&level(b)))
                .ok_or_else(|| Error::Config("empty epsilon grid".into()))?;
            let refined: Vec<DriftPoint> = (-20..=20)
                .map(|k| best.epsilon + k as f64 * 0.0025)
                .filter(|e| *e > 0.0 && *e < 1.0)
                .map(point)
                .collect();
            let best = refined.iter().copied().chain([best]).min_by(|a, b| level(a).total_cmp(&level(b))).unwrap();
            frontier.extend(refined);
            best
        }
        DriftObjective::LargestMargin { c_max } => frontier
            .iter()
            .copied()
            .filter(|p| p.c <= c_max)
            .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
            .ok_or_else(|| Error::OutOfRange(format!("no epsilon on the grid has c <= {c_max}")))?,
    };
    frontier.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    frontier.dedup_by(|a, b| a.epsilon == b.epsilon);
    Ok((chosen.epsilon, chosen.c, frontier))
}

/// Drift certificates for a two-block kernel pair and for their product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDriftCertificate {
    pub epsilon0: f64,
    /// max(c_K, c_L).
    pub c0: f64,
    /// max_x (K(W) − ε₀V)₊.
    pub c_k: f64,
    /// max_y (L(V) − ε₀W)₊.
    pub c_l: f64,
    /// ε₀².
    pub epsilon: f64,
    /// (1 + ε₀)c₀.
    pub c: f64,
    /// max_x (KL(V) − εV − c).
    pub residual: f64,
    pub frontier: Vec<DriftPoint>,
}

/// Certifies K(W) ≤ ε₀V + c₀ and L(V) ≤ ε₀W + c₀, hence KL(V) ≤ ε₀²V + (1+ε₀)c₀.
///
/// With `epsilon0 = None` the ε₀ grid is searched for the smallest
/// combined level c/(1−ε).
pub fn certify_drift_pair(
    k: &KernelMatrix,
    l: &KernelMatrix,
    v: &WeightFunction,
    w: &WeightFunction,
    epsilon0: Option<f64>,
) -> Result<PairDriftCertificate> {
    check_len(k.len(), l.len())?;
    check_len(k.len(), v.len())?;
    check_len(k.len(), w.len())?;
    let kw = right_action(k, w.values())?;
    let lv = right_action(l, v.values())?;
    let pair_c = |e: f64| c_of(&kw, v.values(), e).max(c_of(&lv, w.values(), e));
    let frontier: Vec<DriftPoint> =
        default_eps_grid().into_iter().map(|e| DriftPoint { epsilon: e * e, c: (1.0 + e) * pair_c(e) }).collect();
    let e0 = match epsilon0 {
        Some(e) => {
            check_eps(e)?;
            e
        }
        None => {
            let level = |e: f64| (1.0 + e) * pair_c(e) / (1.0 - e * e);
            let mut cands = default_eps_grid();
            cands.extend((1..200).map(|k| k as f64 * 0.005));
            cands.into_iter().min_by(|a, b| level(*a).total_cmp(&level(*b))).expect("non-empty")
        }
    };
    let (c_k, c_l) = (c_of(&kw, v.values(), e0), c_of(&lv, w.values(), e0));
    let c0 = c_k.max(c_l);
    let (epsilon, c) = (e0 * e0, (1.0 + e0) * c0);
    let kl = k.compose(l)?;
    let residual = naive_residual(&kl, v.values(), v.values(), epsilon, c);
    Ok(PairDriftCertificate { epsilon0: e0, c0, c_k, c_l, epsilon, c, residual, frontier })
}

/// δ_x P ≥ α ν_r for every x in {V ≤ r}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorizationCertificate {
    pub r: f64,
    /// Σ_j min_{i ∈ sublevel} P[i, j]; zero when no minorization exists.
    pub alpha: f64,
    /// Normalized entrywise infimum; `None` when α = 0.
    pub nu_r: Option<Vec<f64>>,
    pub sublevel_indices: Vec<usize>,
}

impl MinorizationCertificate {
    pub fn ok(&self) -> bool {
        self.alpha > 0.0 && self.nu_r.is_some()
    }

    /// Smallest slack of P[i, j] − α ν_r[j] over the sublevel rows.
    pub fn recheck(&self, p: &KernelMatrix) -> f64 {
        let Some(nu) = &self.nu_r else { return f64::NEG_INFINITY };
        self.sublevel_indices
            .iter()
            .flat_map(|&i| p.row(i).iter().zip(nu).map(|(a, b)| a - self.alpha * b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn verify(&self, p: &KernelMatrix) -> bool {
        self.ok() && self.recheck(p) >= -MINORIZATION_SLACK
    }
}

/// Indices with V ≤ r, or a level error when there are none.
pub fn sublevel(v: &WeightFunction, r: f64) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..v.len()).filter(|&i| v.values()[i] <= r).collect();
    if idx.is_empty() {
        Err(Error::EmptyLevel(r))
    } else {
        Ok(idx)
    }
}

/// Maximal common-component minorization on {V ≤ r}. A zero α is reported
/// in the certificate rather than raised.
pub fn minorization(p: &KernelMatrix, v: &WeightFunction, r: f64) -> Result<MinorizationCertificate> {
    check_len(p.len(), v.len())?;
    let sub = sublevel(v, r)?;
    Ok(minorize_rows(p, sub, r))
}

pub(crate) fn minorize_rows(p: &KernelMatrix, rows: Vec<usize>, r: f64) -> MinorizationCertificate {
    let n = p.len();
    let mut q = p.row(rows[0]).to_vec();
    for &i in &rows[1..] {
        for (qj, pj) in q.iter_mut().zip(p.row(i)) {
            *qj = qj.min(*pj);
        }
    }
    debug_assert_eq!(q.len(), n);
    let alpha: f64 = q.iter().sum();
    let nu_r = (alpha > 0.0).then(|| q.iter().map(|x| x / alpha).collect());
    MinorizationCertificate { r, alpha: if alpha > 0.0 { alpha } else { 0.0 }, nu_r, sublevel_indices: rows }
}

/// D_κ(δ_x P, δ_y P) ≤ (1−α) κ(x, y) whenever ϖ_V(x, y) ≤ r.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalContractionCertificate {
    pub r: f64,
    /// min(1 − s, 1 − 10⁻⁶) when s < 1, otherwise 0.
    pub alpha: f64,
    /// Largest ratio D_κ(δ_x P, δ_y P)/κ(x, y) over the evaluated pairs.
    pub s: f64,
    pub kappa_label: String,
    pub witness_pair: (usize, usize),
    pub n_pairs: usize,
    /// Set when only a random subset of pairs was evaluated.
    pub heuristic: bool,
}

impl LocalContractionCertificate {
    pub fn contracts(&self) -> bool {
        self.s < 1.0
    }

    /// Largest D_κ(δ_x P, δ_y P) − (1−α)κ(x, y) over all pairs in the level set.
    pub fn recheck(&self, p: &KernelMatrix, kappa: &CostFunction, v: &WeightFunction) -> Result<f64> {
        let pairs = level_pairs(v, kappa, self.r);
        let worst = pairs
            .par_iter()
            .map(|&(i, j)| Ok(distance(p.row(i), p.row(j), kappa)? - (1.0 - self.alpha) * kappa.evaluate(i, j)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(worst.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn verify(&self, p: &KernelMatrix, kappa: &CostFunction, v: &WeightFunction) -> Result<bool> {
        Ok(self.contracts() && self.recheck(p, kappa, v)? <= CONTRACTION_SLACK)
    }
}

/// Off-diagonal pairs with ϖ_V ≤ r; unordered when κ is symmetric.
fn level_pairs(v: &WeightFunction, kappa: &CostFunction, r: f64) -> Vec<(usize, usize)> {
    let n = v.len();
    let sym = kappa.is_symmetric();
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| if sym { j > i } else { j != i }).map(move |j| (i, j)))
        .filter(|&(i, j)| v.pair_sum(i, j) <= r)
        .collect()
}

fn alpha_from_s(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - s).min(ALPHA_CAP)
    } else {
        0.0
    }
}

/// Ratios ℓ(x, y) = D_κ(δ_x P, δ_y P)/κ(x, y) on the given pairs, in parallel.
pub(crate) fn pair_ratios(p: &KernelMatrix, kappa: &CostFunction, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let k = kappa.evaluate(i, j);
            if !(k > 0.0) {
                return Err(Error::AxiomViolation(i, j));
            }
            Ok(distance(p.row(i), p.row(j), kappa)? / k)
        })
        .collect()
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |acc, (k, x)| if x > acc.1 { (k, x) } else { acc })
}

/// Exhaustive local contraction over the level set ϖ_V ≤ r.
pub fn local_contraction(
    p: &KernelMatrix,
    kappa: &CostFunction,
    v: &WeightFunction,
    r: f64,
) -> Result<LocalContractionCertificate> {
    local_contraction_budget(p, kappa, v, r, None)
}

/// As [`local_contraction`]; with `budget = Some((max_pairs, seed))` at most
/// `max_pairs` pairs are drawn uniformly and the certificate is flagged
/// heuristic.
pub fn local_contraction_budget(
    p: &KernelMatrix,
    kappa: &CostFunction,
    v: &WeightFunction,
    r: f64,
    budget: Option<(usize, u64)>,
) -> Result<LocalContractionCertificate> {
    check_len(p.len(), v.len())?;
    check_len(p.len(), kappa.len())?;
    let mut pairs = level_pairs(v, kappa, r);
    if pairs.is_empty() {
        return Err(Error::EmptyLevel(r));
    }
    let mut heuristic = false;
    if let Some((max_pairs, seed)) = budget {
        if pairs.len() > max_pairs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = sample(&mut rng, pairs.len(), max_pairs).into_vec();
            picked.sort_unstable();
            pairs = picked.into_iter().map(|k| pairs[k]).collect();
            heuristic = true;
        }
    }
    let ratios = pair_ratios(p, kappa, &pairs)?;
    let (k, s) = argmax(&ratios);
    Ok(LocalContractionCertificate {
        r,
        alpha: alpha_from_s(s),
        s,
        kappa_label: kappa.label().to_string(),
        witness_pair: pairs[k],
        n_pairs: pairs.len(),
        heuristic,
    })
}

/// Local contraction at every level at once: pair ratios sorted by ϖ_V with
/// running maxima, so that α(r) is a binary search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionProfile {
    pub kappa_label: String,
    /// ϖ_V of each pair, ascending.
    pub levels: Vec<f64>,
    /// Running maximum of the ratios in `levels` order.
    pub running_max: Vec<f64>,
    /// Pair attaining each running maximum.
    pub witnesses: Vec<(usize, usize)>,
}

impl ContractionProfile {
    /// Smallest off-diagonal ϖ_V.
    pub fn r0(&self) -> f64 {
        self.levels[0]
    }

    pub fn max_level(&self) -> f64 {
        *self.levels.last().expect("non-empty profile")
    }

    fn index(&self, r: f64) -> Option<usize> {
        let k = self.levels.partition_point(|&l| l <= r);
        k.checked_sub(1)
    }

    /// s(r), or `None` below the first level.
    pub fn s(&self, r: f64) -> Option<f64> {
        self.index(r).map(|k| self.running_max[k])
    }

    /// α(r) with the same convention as [`LocalContractionCertificate`].
    pub fn alpha(&self, r: f64) -> Option<f64> {
        self.s(r).map(alpha_from_s)
    }

    pub fn certificate(&self, r: f64) -> Result<LocalContractionCertificate> {
        let k = self.index(r).ok_or(Error::EmptyLevel(r))?;
        Ok(LocalContractionCertificate {
            r,
            alpha: alpha_from_s(self.running_max[k]),
            s: self.running_max[k],
            kappa_label: self.kappa_label.clone(),
            witness_pair: self.witnesses[k],
            n_pairs: k + 1,
            heuristic: false,
        })
    }
}

pub fn contraction_profile(p: &KernelMatrix, kappa: &CostFunction, v: &WeightFunction) -> Result<ContractionProfile> {
    check_len(p.len(), v.len())?;
    check_len(p.len(), kappa.len())?;
    let mut pairs = level_pairs(v, kappa, f64::INFINITY);
    if pairs.is_empty() {
        return Err(Error::EmptyLevel(f64::INFINITY));
    }
    pairs.sort_by(|a, b| v.pair_sum(a.0, a.1).total_cmp(&v.pair_sum(b.0, b.1)).then(a.cmp(b)));
    let ratios = pair_ratios(p, kappa, &pairs)?;
    let mut running_max = Vec::with_capacity(ratios.len());
    let mut witnesses = Vec::with_capacity(ratios.len());
    let (mut best, mut wit) = (f64::NEG_INFINITY, pairs[0]);
    for (pair, x) in pairs.iter().zip(&ratios) {
        if *x > best {
            best = *x;
            wit = *pair;
        }
        running_max.push(best);
        witnesses.push(wit);
    }
    Ok(ContractionProfile {
        kappa_label: kappa.label().to_string(),
        levels: pairs.iter().map(|&(i, j)| v.pair_sum(i, j)).collect(),
        running_max,
        witnesses,
    })
}

/// Q_h(V) ≤ (1 + a₀h)⁻¹V + a₁h checked pointwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorDriftReport {
    pub h: f64,
    pub a0: f64,
    pub a1: f64,
    pub epsilon_h: f64,
    pub c_h: f64,
    /// max_i (Q_h(V) − ε_h V − c_h).
    pub max_violation: f64,
    /// max_i (Q_h(V) − ε_h V − c_h)/(ε_h V + c_h).
    pub max_relative_violation: f64,
    pub worst_index: usize,
    pub rel_tol: f64,
    pub passes: bool,
}

/// Default relative tolerance of [`generator_drift_check`].
pub const GENERATOR_REL_TOL: f64 = 1e-3;

pub fn generator_drift_check(
    q_h: &KernelMatrix,
    v: &WeightFunction,
    a0: f64,
    a1: f64,
    h: f64,
) -> Result<GeneratorDriftReport> {
    generator_drift_check_tol(q_h, v, a0, a1, h, GENERATOR_REL_TOL)
}

pub fn generator_drift_check_tol(
    q_h: &KernelMatrix,
    v: &WeightFunction,
    a0: f64,
    a1: f64,
    h: f64,
    rel_tol: f64,
) -> Result<GeneratorDriftReport> {
    if !(h > 0.0) {
        return Err(Error::OutOfRange(format!("step h = {h} must be positive")));
    }
    let qv = right_action(q_h, v.values())?;
    let epsilon_h = 1.0 / (1.0 + a0 * h);
    let c_h = a1 * h;
    let viol: Vec<f64> = qv.iter().zip(v.values()).map(|(q, x)| q - (epsilon_h * x + c_h)).collect();
    let rel: Vec<f64> = viol.iter().zip(v.values()).map(|(d, x)| d / (epsilon_h * x + c_h)).collect();
    let (worst_index, max_relative_violation) = argmax(&rel);
    Ok(GeneratorDriftReport {
        h,
        a0,
        a1,
        epsilon_h,
        c_h,
        max_violation: argmax(&viol).1,
        max_relative_violation,
        worst_index,
        rel_tol,
        passes: max_relative_violation <= rel_tol,
    })
}
