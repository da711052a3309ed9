//! Kernel constructors for the example model families.
//!
//! All builders work on one-dimensional grids. Mass falling outside the
//! covered region is assigned to the first or last cell.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use libm::erfc;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Construction, KernelDiagnostics, KernelMatrix};
use crate::error::{check_len, Error, Result};
use crate::measures::{DiscreteMeasure, DomainTag, Grid};

/// Standard normal CDF.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Mass of N(mean, sd²) in `[lo, hi]`, computed on the tail that keeps
/// the subtraction accurate.
fn normal_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
    if a > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

fn unit_interval_edges(grid: &Grid) -> Result<&[f64]> {
    match grid.domain() {
        DomainTag::OpenInterval { a, b } if *a == 0.0 && *b == 1.0 => grid.require_1d(),
        _ => Err(Error::Config("this model lives on the open unit interval (0,1)".into())),
    }
}

/// Fills an `n × n` matrix row by row in parallel; each row closure returns
/// the unnormalized cell masses and the clamped mass.
fn build_rows(n: usize, row: impl Fn(usize, &mut [f64]) -> f64 + Sync) -> (Array2<f64>, f64) {
    let mut data = vec![0.0; n * n];
    let clamped: Vec<f64> = data.par_chunks_mut(n).enumerate().map(|(i, r)| row(i, r)).collect();
    let worst = clamped.into_iter().fold(0.0, f64::max);
    (Array2::from_shape_vec((n, n), data).expect("square"), worst)
}

/// P(x, ·) = x Q(x, ·) + (1 − x) ν on the unit interval.
pub fn build_unit_interval_kernel(q: &KernelMatrix, nu: &DiscreteMeasure, grid: &Grid) -> Result<KernelMatrix> {
    unit_interval_edges(grid)?;
    check_len(grid.len(), q.len())?;
    check_len(grid.len(), nu.len())?;
    let n = grid.len();
    let (rows, _) = build_rows(n, |i, r| {
        let x = grid.coord(i);
        for j in 0..n {
            r[j] = x * q.get(i, j) + (1.0 - x) * nu.weights()[j];
        }
        0.0
    });
    Ok(KernelMatrix::from_unnormalized(rows, "unit_interval_mixture")?
        .with_diagnostics(KernelDiagnostics::new(Construction::Algebraic, 0.0)))
}

/// Q(x, ·) = N(x, s²) conditioned on (0, 1), integrated exactly over cells.
pub fn gaussian_q_kernel(grid: &Grid, sd: f64) -> Result<KernelMatrix> {
    let e = unit_interval_edges(grid)?;
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::Config(format!("Gaussian width {sd} must be positive")));
    }
    let n = grid.len();
    let (rows, _) = build_rows(n, |i, r| {
        let x = grid.coord(i);
        for j in 0..n {
            r[j] = normal_mass(e[j], e[j + 1], x, sd);
        }
        0.0
    });
    Ok(KernelMatrix::from_unnormalized(rows, format!("truncated_gaussian(sd={sd})"))?
        .with_diagnostics(KernelDiagnostics::new(Construction::ExactCellIntegration, 0.0)))
}

/// P(x, dy) = (1/(2x)) 1_{(0,x]}(y) dy + (1/(2(1−x))) 1_{(x,1)}(y) dy.
///
/// Cell masses are exact integrals of the piecewise-constant density, with
/// the cell containing x split at x.
pub fn build_arcsine_kernel(grid: &Grid) -> Result<KernelMatrix> {
    let e = unit_interval_edges(grid)?;
    let n = grid.len();
    let (rows, _) = build_rows(n, |i, r| {
        let x = grid.coord(i);
        let (left, right) = (0.5 / x, 0.5 / (1.0 - x));
        for j in 0..n {
            r[j] = left * overlap(e[j], e[j + 1], 0.0, x) + right * overlap(e[j], e[j + 1], x, 1.0);
        }
        0.0
    });
    Ok(KernelMatrix::from_unnormalized(rows, "arcsine")?
        .with_diagnostics(KernelDiagnostics::new(Construction::ExactCellIntegration, 0.0)))
}

/// Half-line chain: (δ/2)·Unif(0, x] + (δ/2)·(x + half-normal) + (1−δ)·Weibull
/// with CDF 1 − exp(−z^{1+γ}). Cell masses use exact CDF differences; mass
/// below `x_min` or above `x_max` goes to the boundary cells.
pub fn build_halfline_kernel(delta: f64, gamma: f64, grid: &Grid) -> Result<KernelMatrix> {
    let DomainTag::HalfLineTruncated { .. } = grid.domain() else {
        return Err(Error::Config("the half-line model needs a half_line_truncated grid".into()));
    };
    if !(0.0..1.0).contains(&delta) || !(gamma > 0.0) {
        return Err(Error::Config(format!("need delta in [0,1) and gamma > 0, got {delta}, {gamma}")));
    }
    let e = grid.require_1d()?;
    let n = grid.len();
    let weibull = |z: f64| if z <= 0.0 { 0.0 } else { -(-z.powf(1.0 + gamma)).exp_m1() };
    let (rows, clamped) = build_rows(n, |i, r| {
        let x = grid.coord(i);
        let unif = |y: f64| (y / x).clamp(0.0, 1.0);
        let shift = |y: f64| if y <= x { 0.0 } else { libm::erf((y - x) / SQRT_2) };
        let cdf = |y: f64| 0.5 * delta * (unif(y) + shift(y)) + (1.0 - delta) * weibull(y);
        // Extended outer edges: (0, e_1] and [e_{n-1}, ∞).
        let mut prev = 0.0;
        for j in 0..n {
            let next = if j + 1 == n { 1.0 } else { cdf(e[j + 1]) };
            r[j] = (next - prev).max(0.0);
            prev = next;
        }
        cdf(e[0]) + (1.0 - cdf(e[n]))
    });
    Ok(KernelMatrix::from_unnormalized(rows, format!("half_line(delta={delta}, gamma={gamma})"))?
        .with_diagnostics(KernelDiagnostics::new(Construction::ExactCellIntegration, clamped)))
}

/// Map F in x ↦ F(x) + noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AffineMap {
    /// F(x) = a x + b.
    Affine { a: f64, b: f64 },
    /// F(x) = a x + b tanh(x), Lipschitz with constant |a| + |b|.
    Tanh { a: f64, b: f64 },
}

impl AffineMap {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            AffineMap::Affine { a, b } => a * x + b,
            AffineMap::Tanh { a, b } => a * x + b * x.tanh(),
        }
    }
}

/// Noise law, discretized to atoms on a displacement grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// N(0, sd²) on `atoms` equispaced points over ±`width`·sd, each atom
    /// carrying the exact mass of its cell (tails folded into end cells).
    Gaussian {
        sd: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// Uniform on [−half_width, half_width], cell midpoints.
    Uniform {
        half_width: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
    /// No noise.
    Dirac,
}

fn default_atoms() -> usize {
    201
}

fn default_width() -> f64 {
    8.0
}

impl NoiseSpec {
    /// Displacements and their masses.
    pub fn atoms(&self) -> Result<(Vec<f64>, DiscreteMeasure)> {
        match *self {
            NoiseSpec::Dirac => Ok((vec![0.0], DiscreteMeasure::dirac(1, 0))),
            NoiseSpec::Gaussian { sd, atoms, width } => {
                if !(sd > 0.0 && atoms >= 2 && width > 0.0) {
                    return Err(Error::Config("Gaussian noise needs sd > 0, atoms >= 2, width > 0".into()));
                }
                let h = 2.0 * width * sd / atoms as f64;
                let z: Vec<f64> = (0..atoms).map(|k| -width * sd + (k as f64 + 0.5) * h).collect();
                let w: Vec<f64> = (0..atoms)
                    .map(|k| {
                        let lo = if k == 0 { f64::NEG_INFINITY } else { z[k] - 0.5 * h };
                        let hi = if k + 1 == atoms { f64::INFINITY } else { z[k] + 0.5 * h };
                        normal_mass(lo, hi, 0.0, sd)
                    })
                    .collect();
                Ok((z, DiscreteMeasure::normalized(w)?))
            }
            NoiseSpec::Uniform { half_width, atoms } => {
                if !(half_width > 0.0 && atoms >= 1) {
                    return Err(Error::Config("uniform noise needs half_width > 0 and atoms >= 1".into()));
                }
                let h = 2.0 * half_width / atoms as f64;
                let z = (0..atoms).map(|k| -half_width + (k as f64 + 0.5) * h).collect();
                Ok((z, DiscreteMeasure::uniform(atoms)))
            }
        }
    }

    /// sup |Z| over the atoms.
    pub fn max_abs(&self) -> Result<f64> {
        Ok(self.atoms()?.0.iter().fold(0.0, |a, z| a.max(z.abs())))
    }
}

/// Iterated random function x ↦ F(x) + Z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfModel {
    pub map: AffineMap,
    pub noise: NoiseSpec,
}

/// Row x puts the mass of each noise atom z on the cell containing F(x) + z.
pub fn build_irf_kernel(model: &IrfModel, grid: &Grid) -> Result<KernelMatrix> {
    let e = grid.require_1d()?;
    let (z, w) = model.noise.atoms()?;
    let n = grid.len();
    let (lo, hi) = (e[0], e[n]);
    let (rows, clamped) = build_rows(n, |i, r| {
        let fx = model.map.apply(grid.coord(i));
        let mut out = 0.0;
        for (zk, wk) in z.iter().zip(w.weights()) {
            let y = fx + zk;
            if !(lo..=hi).contains(&y) {
                out += wk;
            }
            r[grid.locate(y).expect("1-D grid")] += wk;
        }
        out
    });
    Ok(KernelMatrix::from_unnormalized(rows, "irf")?.with_diagnostics(KernelDiagnostics::new(Construction::Atomic, clamped)))
}

/// Deterministic kernel δ_{F(x)} with F(x) split linearly between the two
/// neighbouring grid points, so that moves shorter than a cell are kept.
pub fn build_deterministic_kernel(f: impl Fn(f64) -> f64 + Sync, grid: &Grid) -> Result<KernelMatrix> {
    grid.require_1d()?;
    let n = grid.len();
    let xs: Vec<f64> = grid.coords().collect();
    let (rows, clamped) = build_rows(n, |i, r| {
        let y = f(xs[i]);
        if y <= xs[0] {
            r[0] = 1.0;
            return if y < xs[0] { 1.0 } else { 0.0 };
        }
        if y >= xs[n - 1] {
            r[n - 1] = 1.0;
            return if y > xs[n - 1] { 1.0 } else { 0.0 };
        }
        let k = xs.partition_point(|&v| v <= y) - 1;
        let t = (y - xs[k]) / (xs[k + 1] - xs[k]);
        r[k] += 1.0 - t;
        r[k + 1] += t;
        0.0
    });
    Ok(KernelMatrix::from_unnormalized(rows, "deterministic")?
        .with_diagnostics(KernelDiagnostics::new(Construction::Atomic, clamped)))
}

/// Potential U for Langevin dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// U(x) = a x²/2.
    Quadratic { a: f64 },
    /// U(x) = b x⁴/4 − a x²/2.
    DoubleWell { a: f64, b: f64 },
}

impl Potential {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::Quadratic { a } => 0.5 * a * x * x,
            Potential::DoubleWell { a, b } => 0.25 * b * x.powi(4) - 0.5 * a * x * x,
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match *self {
            Potential::Quadratic { a } => a * x,
            Potential::DoubleWell { a, b } => b * x.powi(3) - a * x,
        }
    }
}

/// Euler–Maruyama step for dX = −γU'(X)dt + σ dB: row x is
/// N(x − γU'(x)h, σ²h) integrated over cells. With σ = 0 the row is the
/// Dirac mass at the cell containing the mean.
pub fn build_langevin_kernel(u: &Potential, gamma: f64, sigma: f64, h: f64, grid: &Grid) -> Result<KernelMatrix> {
    let e = grid.require_1d()?;
    if !(h > 0.0 && sigma >= 0.0 && gamma > 0.0) {
        return Err(Error::Config(format!("need h > 0, sigma >= 0, gamma > 0, got {h}, {sigma}, {gamma}")));
    }
    let n = grid.len();
    let sd = sigma * h.sqrt();
    let (rows, clamped) = build_rows(n, |i, r| {
        let x = grid.coord(i);
        let mean = x - gamma * u.gradient(x) * h;
        if sd == 0.0 {
            r[grid.locate(mean).expect("1-D grid")] = 1.0;
            return if (e[0]..=e[n]).contains(&mean) { 0.0 } else { 1.0 };
        }
        for j in 0..n {
            let lo = if j == 0 { f64::NEG_INFINITY } else { e[j] };
            let hi = if j + 1 == n { f64::INFINITY } else { e[j + 1] };
            r[j] = normal_mass(lo, hi, mean, sd);
        }
        normal_mass(f64::NEG_INFINITY, e[0], mean, sd) + normal_mass(e[n], f64::INFINITY, mean, sd)
    });
    Ok(KernelMatrix::from_unnormalized(rows, format!("langevin(h={h}, sigma={sigma})"))?
        .with_diagnostics(KernelDiagnostics::new(Construction::ExactCellIntegration, clamped)))
}
