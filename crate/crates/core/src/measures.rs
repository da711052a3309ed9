//! Grids, discrete probability measures and weight functions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Total mass tolerance for a probability vector.
pub const MASS_TOL: f64 = 1e-12;

/// The open domain a grid discretizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainTag {
    OpenInterval { a: f64, b: f64 },
    HalfLineTruncated { x_min: f64, x_max: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl DomainTag {
    pub fn dim(&self) -> usize {
        match self {
            DomainTag::Box { lo, .. } => lo.len(),
            _ => 1,
        }
    }

    /// Lower and upper corner of the computational region.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainTag::OpenInterval { a, b } => (vec![*a], vec![*b]),
            DomainTag::HalfLineTruncated { x_min, x_max } => (vec![*x_min], vec![*x_max]),
            DomainTag::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    pub fn volume(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter().zip(&hi).map(|(l, h)| h - l).product()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainTag::OpenInterval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::Config(format!("open_interval needs a < b, got ({a}, {b})")));
                }
            }
            DomainTag::HalfLineTruncated { x_min, x_max } => {
                if !(x_min.is_finite() && x_max.is_finite() && *x_min > 0.0 && x_min < x_max) {
                    return Err(Error::Config(format!(
                        "half_line_truncated needs 0 < x_min < x_max, got ({x_min}, {x_max})"
                    )));
                }
            }
            DomainTag::Box { lo, hi } => {
                if lo.is_empty() || lo.len() > 3 || lo.len() != hi.len() {
                    return Err(Error::Config("box bounds must have equal length in 1..=3".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
                    return Err(Error::Config("box needs lo < hi in every coordinate".into()));
                }
            }
        }
        Ok(())
    }

    /// Distance from `x` to the boundary of the underlying (untruncated)
    /// open domain. For the half-line this is `x` itself.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainTag::OpenInterval { a, b } => (x[0] - a).min(b - x[0]),
            DomainTag::HalfLineTruncated { .. } => x[0],
            DomainTag::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| (v - l).min(h - v))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn strictly_inside(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.bounds();
        x.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| v > l && v < h)
    }
}

/// Points of a discretized state space together with their cell volumes.
///
/// Points are stored flattened (`dim` coordinates per point). Tensor grids
/// on boxes are enumerated with the last coordinate varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    dim: usize,
    cell_volumes: Vec<f64>,
    domain: DomainTag,
    edges: Option<Vec<f64>>,
}

impl Grid {
    /// Midpoint grid with `n_per_dim` uniform cells per coordinate.
    pub fn build(domain: DomainTag, n_per_dim: usize) -> Result<Grid> {
        domain.validate()?;
        if n_per_dim < 2 {
            return Err(Error::Config(format!("n_per_dim must be at least 2, got {n_per_dim}")));
        }
        let (lo, hi) = domain.bounds();
        let dim = lo.len();
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| {
                let w = (h - l) / n_per_dim as f64;
                (0..n_per_dim).map(|k| l + (k as f64 + 0.5) * w).collect()
            })
            .collect();
        let cell: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l) / n_per_dim as f64).product();
        let total = n_per_dim.pow(dim as u32);
        let mut points = Vec::with_capacity(total * dim);
        for flat in 0..total {
            let mut rem = flat;
            let mut coords = vec![0.0; dim];
            for d in (0..dim).rev() {
                coords[d] = axes[d][rem % n_per_dim];
                rem /= n_per_dim;
            }
            points.extend_from_slice(&coords);
        }
        let edges = (dim == 1).then(|| {
            let w = (hi[0] - lo[0]) / n_per_dim as f64;
            let mut e: Vec<f64> = (0..=n_per_dim).map(|k| lo[0] + k as f64 * w).collect();
            e[n_per_dim] = hi[0];
            e
        });
        Ok(Grid { points, dim, cell_volumes: vec![cell; total], domain, edges })
    }

    /// Grid from explicit points. One-dimensional points must be sorted;
    /// cell edges are then placed halfway between neighbours.
    pub fn from_parts(points: Vec<Vec<f64>>, cell_volumes: Vec<f64>, domain: DomainTag) -> Result<Grid> {
        domain.validate()?;
        let dim = domain.dim();
        if points.len() < 2 {
            return Err(Error::Config("a grid needs at least two points".into()));
        }
        check_len(points.len(), cell_volumes.len())?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Config(format!("point {p:?} does not have dimension {dim}")));
        }
        if cell_volumes.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("cell volumes must be positive".into()));
        }
        if let Some(p) = points.iter().find(|p| !domain.strictly_inside(p)) {
            return Err(Error::Config(format!("point {p:?} is not strictly inside the domain")));
        }
        let edges = if dim == 1 {
            if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                return Err(Error::Config("one-dimensional points must be strictly increasing".into()));
            }
            let (lo, hi) = domain.bounds();
            let mut e = vec![lo[0]];
            e.extend(points.windows(2).map(|w| 0.5 * (w[0][0] + w[1][0])));
            e.push(hi[0]);
            Some(e)
        } else {
            let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("grid points must be distinct".into()));
            }
            None
        };
        Ok(Grid { points: points.concat(), dim, cell_volumes, domain, edges })
    }

    pub fn len(&self) -> usize {
        self.cell_volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_volumes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// First coordinate of point `i`; the coordinate itself on 1-D grids.
    pub fn coord(&self, i: usize) -> f64 {
        self.points[i * self.dim]
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.coord(i))
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.points.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    pub fn domain(&self) -> &DomainTag {
        &self.domain
    }

    /// Cell edges of a 1-D grid (`len() + 1` values).
    pub fn cell_edges(&self) -> Option<&[f64]> {
        self.edges.as_deref()
    }

    pub(crate) fn require_1d(&self) -> Result<&[f64]> {
        self.cell_edges()
            .ok_or_else(|| Error::Config("this operation needs a one-dimensional grid".into()))
    }

    /// Euclidean distance between grid points.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclid(self.point(i), self.point(j))
    }

    /// Index of the cell containing `x` on a 1-D grid, clamping values
    /// outside the covered region to the boundary cells.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let e = self.edges.as_ref()?;
        let n = e.len() - 1;
        let k = e.partition_point(|&v| v <= x);
        Some(k.saturating_sub(1).min(n - 1))
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A probability vector over grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Checks non-negativity and unit mass.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL * weights.len().max(1000) as f64 / 1000.0 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { weights })
    }

    /// Rescales non-negative weights to unit mass.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateMeasure);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(DiscreteMeasure { weights })
    }

    pub fn dirac(n: usize, i: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        DiscreteMeasure { weights }
    }

    pub fn uniform(n: usize) -> Self {
        DiscreteMeasure { weights: vec![1.0 / n as f64; n] }
    }

    /// Random measure with i.i.d. exponential weights, i.e. a flat
    /// Dirichlet draw on the simplex.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        Self::normalized(raw).unwrap_or_else(|_| Self::uniform(n))
    }

    /// Random measure whose support is a random subset of size `k`.
    pub fn random_sparse<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k.min(n) {
            let j = rng.random_range(i..n);
            idx.swap(i, j);
        }
        let mut raw = vec![0.0; n];
        for &i in &idx[..k.clamp(1, n)] {
            raw[i] = 0.05 + rng.random::<f64>();
        }
        Self::normalized(raw).expect("positive mass")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Indices carrying positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    /// Integral of `f` against the measure.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        check_len(self.len(), f.len())?;
        Ok(self.weights.iter().zip(f).map(|(w, v)| w * v).sum())
    }
}

/// Positive weight (Lyapunov) function on grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    values: Vec<f64>,
    lower_bound: f64,
    label: String,
}

impl WeightFunction {
    /// Weight function whose lower bound is its minimum value.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let lb = values.iter().copied().fold(f64::INFINITY, f64::min);
        Self::with_lower_bound(values, lb)
    }

    pub fn with_lower_bound(values: Vec<f64>, lower_bound: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeight("empty value vector".into()));
        }
        if !(lower_bound.is_finite() && lower_bound > 0.0) {
            return Err(Error::InvalidWeight(format!("lower bound {lower_bound} must be positive")));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= lower_bound)) {
            return Err(Error::InvalidWeight(format!("value {v} is below the lower bound {lower_bound}")));
        }
        Ok(WeightFunction { values, lower_bound, label: "V".into() })
    }

    /// Evaluates `f` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new((0..grid.len()).map(|i| f(grid.point(i))).collect())
    }

    pub fn constant(n: usize, k: f64) -> Result<Self> {
        Self::new(vec![k; n])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// ϖ_V(i, j) = V(i) + V(j).
    pub fn pair_sum(&self, i: usize, j: usize) -> f64 {
        self.values[i] + self.values[j]
    }

    /// `x ↦ (x-a)^{-ι} + (b-x)^{-ι}` on an interval `(a, b)`.
    pub fn boundary_power(grid: &Grid, iota: f64) -> Result<Self> {
        let DomainTag::OpenInterval { a, b } = *grid.domain() else {
            return Err(Error::Config("boundary_power needs an open interval grid".into()));
        };
        Ok(Self::from_fn(grid, |x| (x[0] - a).powf(-iota) + (b - x[0]).powf(-iota))?
            .with_label(format!("boundary_power(iota={iota})")))
    }

    /// `x ↦ x^{-ι} + x` on the half-line.
    pub fn half_line(grid: &Grid, iota: f64) -> Result<Self> {
        Ok(Self::from_fn(grid, |x| x[0].powf(-iota) + x[0])?.with_label(format!("half_line(iota={iota})")))
    }

    /// `x ↦ 1/2 + ‖x‖^p`.
    pub fn polynomial(grid: &Grid, p: f64) -> Result<Self> {
        Ok(Self::from_fn(grid, |x| 0.5 + norm(x).powf(p))?.with_label(format!("polynomial(p={p})")))
    }

    /// `x ↦ scale · exp(δ‖x‖)`.
    pub fn exponential(grid: &Grid, delta: f64, scale: f64) -> Result<Self> {
        Ok(Self::from_fn(grid, |x| scale * (delta * norm(x)).exp())?
            .with_label(format!("exponential(delta={delta}, scale={scale})")))
    }
}

/// Discretizes a density by midpoint quadrature and renormalizes.
pub fn discretize_density(density: impl Fn(&[f64]) -> f64, grid: &Grid) -> Result<DiscreteMeasure> {
    let mut raw = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let d = density(grid.point(i));
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::Config(format!("density value {d} at point {i} is not finite and non-negative")));
        }
        raw.push(d * grid.cell_volumes()[i]);
    }
    DiscreteMeasure::normalized(raw)
}

/// V̄ = 1/2 + (ε/(2c))·V. If P(V) ≤ εV + c then P(V̄) ≤ εV̄ + 1/2.
pub fn rescale_weight(v: &WeightFunction, epsilon: f64, c: f64) -> Result<WeightFunction> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} not in (0,1)")));
    }
    if !(c.is_finite() && c > 0.5) {
        return Err(Error::OutOfRange(format!("c {c} must exceed 1/2")));
    }
    let s = epsilon / (2.0 * c);
    let values = v.values().iter().map(|x| 0.5 + s * x).collect();
    Ok(WeightFunction::with_lower_bound(values, 0.5 + s * v.lower_bound())?
        .with_label(format!("rescaled({})", v.label())))
}

/// ‖μ1 − μ2‖_V = Σ |μ1 − μ2| V.
pub fn weighted_norm_diff(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, v: &WeightFunction) -> Result<f64> {
    check_len(mu1.len(), mu2.len())?;
    check_len(mu1.len(), v.len())?;
    Ok(weighted_l1(mu1.weights(), mu2.weights(), v.values()))
}

pub(crate) fn weighted_l1(a: &[f64], b: &[f64], v: &[f64]) -> f64 {
    a.iter().zip(b).zip(v).map(|((x, y), w)| (x - y).abs() * w).sum()
}

pub(crate) fn half_l1(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Total variation distance (1/2)·Σ|μ1 − μ2|.
pub fn total_variation(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure) -> Result<f64> {
    check_len(mu1.len(), mu2.len())?;
    Ok(half_l1(mu1.weights(), mu2.weights()).min(1.0))
}

/// JSON exchange format for a grid with a measure on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub points: Vec<Vec<f64>>,
    pub cell_volumes: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainTag>,
}

impl MeasureFile {
    pub fn new(grid: &Grid, mu: &DiscreteMeasure) -> Result<Self> {
        check_len(grid.len(), mu.len())?;
        Ok(MeasureFile {
            points: grid.points(),
            cell_volumes: grid.cell_volumes().to_vec(),
            weights: mu.weights().to_vec(),
            domain: Some(grid.domain().clone()),
        })
    }

    /// Rebuilds the grid and measure. Without a domain tag the smallest
    /// box containing all cells is used.
    pub fn into_parts(self) -> Result<(Grid, DiscreteMeasure)> {
        check_len(self.points.len(), self.weights.len())?;
        let domain = match self.domain {
            Some(d) => d,
            None => infer_domain(&self.points, &self.cell_volumes)?,
        };
        let grid = Grid::from_parts(self.points, self.cell_volumes, domain)?;
        Ok((grid, DiscreteMeasure::new(self.weights)?))
    }
}

fn infer_domain(points: &[Vec<f64>], vols: &[f64]) -> Result<DomainTag> {
    let dim = points.first().map_or(0, Vec::len);
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::Config("points must share a positive dimension".into()));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for (p, v) in points.iter().zip(vols) {
        let half = 0.5 * v.powf(1.0 / dim as f64);
        for d in 0..dim {
            lo[d] = lo[d].min(p[d] - half);
            hi[d] = hi[d].max(p[d] + half);
        }
    }
    Ok(if dim == 1 {
        DomainTag::OpenInterval { a: lo[0], b: hi[0] }
    } else {
        DomainTag::Box { lo, hi }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(n: usize) -> Grid {
        Grid::build(DomainTag::OpenInterval { a: 0.0, b: 1.0 }, n).unwrap()
    }

    #[test]
    fn midpoint_grids() {
        let g = unit(4);
        let xs: Vec<f64> = g.coords().collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(g.cell_volumes().iter().all(|&v| v == 0.25));
        assert_eq!(unit(2).coords().collect::<Vec<_>>(), vec![0.25, 0.75]);

        let h = Grid::build(DomainTag::HalfLineTruncated { x_min: 0.01, x_max: 10.0 }, 2).unwrap();
        assert_abs_diff_eq!(h.coord(0), 2.5075, epsilon = 1e-12);
        assert_abs_diff_eq!(h.coord(1), 7.5025, epsilon = 1e-12);
        assert_abs_diff_eq!(h.cell_volumes()[0], 4.995, epsilon = 1e-12);
    }

    #[test]
    fn invalid_domains_are_config_errors() {
        assert!(matches!(
            Grid::build(DomainTag::HalfLineTruncated { x_min: 0.0, x_max: 1.0 }, 4),
            Err(Error::Config(_))
        ));
        assert!(matches!(Grid::build(DomainTag::OpenInterval { a: 1.0, b: 0.0 }, 4), Err(Error::Config(_))));
        assert!(matches!(unit_err(1), Err(Error::Config(_))));
    }

    fn unit_err(n: usize) -> Result<Grid> {
        Grid::build(DomainTag::OpenInterval { a: 0.0, b: 1.0 }, n)
    }

    #[test]
    fn box_grid_volume_and_order() {
        let g = Grid::build(DomainTag::Box { lo: vec![0.0, -1.0], hi: vec![2.0, 1.0] }, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_abs_diff_eq!(g.cell_volumes().iter().sum::<f64>(), 4.0, epsilon = 1e-12);
        assert_eq!(g.point(1), &[1.0 / 3.0, 0.0]);
        assert!(g.cell_edges().is_none());
    }

    #[test]
    fn locate_clamps_to_boundary_cells() {
        let g = unit(4);
        assert_eq!(g.locate(-3.0), Some(0));
        assert_eq!(g.locate(0.3), Some(1));
        assert_eq!(g.locate(0.5), Some(2));
        assert_eq!(g.locate(7.0), Some(3));
    }

    #[test]
    fn discretization() {
        let mu = discretize_density(|_| 1.0, &unit(4)).unwrap();
        assert_eq!(mu.weights(), &[0.25; 4]);
        let mu = discretize_density(|x| x[0], &unit(2)).unwrap();
        assert_abs_diff_eq!(mu.weights()[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(mu.weights()[1], 0.75, epsilon = 1e-15);
        assert_eq!(discretize_density(|_| 0.0, &unit(4)), Err(Error::DegenerateMeasure));
    }

    #[test]
    fn rescaling() {
        let v = WeightFunction::new(vec![4.0, 0.0 + 1e-300]).unwrap();
        let r = rescale_weight(&v, 0.5, 2.0).unwrap();
        assert_abs_diff_eq!(r.values()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.values()[1], 0.5, epsilon = 1e-15);
        assert!(r.lower_bound() >= 0.5);
        assert!(rescale_weight(&v, 0.5, 0.5).is_err());
        assert!(rescale_weight(&v, 1.0, 2.0).is_err());
    }

    #[test]
    fn rescaled_drift_on_uniform_kernel() {
        let v = WeightFunction::new(vec![1.0, 2.0, 4.0]).unwrap();
        let vb = rescale_weight(&v, 0.5, 2.0).unwrap();
        let mean = vb.values().iter().sum::<f64>() / 3.0;
        let worst = vb.values().iter().map(|x| mean - 0.5 * x).fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 0.5);
    }

    #[test]
    fn norms() {
        let a = DiscreteMeasure::dirac(2, 0);
        let b = DiscreteMeasure::dirac(2, 1);
        let v = WeightFunction::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(weighted_norm_diff(&a, &b, &v).unwrap(), 4.0);
        assert_eq!(weighted_norm_diff(&a, &a, &v).unwrap(), 0.0);
        let c = DiscreteMeasure::new(vec![0.5, 0.5]).unwrap();
        let two = WeightFunction::constant(2, 2.0).unwrap();
        assert_eq!(weighted_norm_diff(&c, &b, &two).unwrap(), 2.0);

        let p = DiscreteMeasure::new(vec![0.5, 0.5, 0.0]).unwrap();
        let q = DiscreteMeasure::new(vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(total_variation(&p, &q).unwrap(), 0.5);
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        assert_eq!(total_variation(&p, &a), Err(Error::GridMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(vec![1.5, -0.5]).is_err());
        assert!(WeightFunction::with_lower_bound(vec![1.0, 0.2], 0.5).is_err());
        assert!(WeightFunction::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = unit(3);
        let mu = DiscreteMeasure::new(vec![0.2, 0.3, 0.5]).unwrap();
        let file = MeasureFile::new(&g, &mu).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: MeasureFile = serde_json::from_str(&text).unwrap();
        let (g2, mu2) = back.into_parts().unwrap();
        assert_eq!(g2, g);
        assert_eq!(mu2, mu);

        let bare = r#"{"points": [[0.0], [1.0]], "cell_volumes": [1.0, 1.0], "weights": [1.0, 0.0]}"#;
        let (g3, _) = serde_json::from_str::<MeasureFile>(bare).unwrap().into_parts().unwrap();
        assert_eq!(g3.domain(), &DomainTag::OpenInterval { a: -0.5, b: 1.5 });
    }
}
