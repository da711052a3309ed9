//! Invariant measures by power iteration, with a uniqueness probe.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{left_action_raw, KernelMatrix};
use crate::measures::{half_l1, DiscreteMeasure};

/// Number of random restarts used to probe uniqueness.
const RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub pi: DiscreteMeasure,
    pub iterations: usize,
    /// ‖πP − π‖_tv at the last iterate.
    pub residual: f64,
    pub converged: bool,
    /// Every restart landed within 10·tol of π in total variation.
    pub unique: bool,
    pub max_pairwise_tv: f64,
}

fn iterate(p: &KernelMatrix, start: Vec<f64>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, f64)> {
    let mut pi = start;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let next = DiscreteMeasure::normalized(left_action_raw(&pi, p))?.into_weights();
        residual = half_l1(&next, &pi);
        pi = next;
        if residual <= tol {
            return Ok((pi, it, residual));
        }
    }
    Ok((pi, max_iter, residual))
}

/// Power iteration from the uniform measure until ‖πP − π‖_tv ≤ `tol`,
/// then from five random starts (ChaCha8 seeded by `seed`) to probe
/// uniqueness. Exceeding `max_iter` is reported through `converged`.
pub fn invariant_measure(p: &KernelMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<InvariantReport> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tol {tol} must be positive")));
    }
    let n = p.len();
    let (pi, iterations, residual) = iterate(p, DiscreteMeasure::uniform(n).into_weights(), tol, max_iter)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = vec![(pi.clone(), residual <= tol)];
    for _ in 0..RESTARTS {
        let (q, _, res) = iterate(p, DiscreteMeasure::random(n, &mut rng).into_weights(), tol, max_iter)?;
        runs.push((q, res <= tol));
    }
    let mut max_pairwise_tv = 0.0f64;
    for a in 0..runs.len() {
        for b in a + 1..runs.len() {
            max_pairwise_tv = max_pairwise_tv.max(half_l1(&runs[a].0, &runs[b].0));
        }
    }
    let all_converged = runs.iter().all(|r| r.1);
    Ok(InvariantReport {
        pi: DiscreteMeasure::normalized(pi)?,
        iterations,
        residual,
        converged: residual <= tol,
        unique: all_converged && max_pairwise_tv <= 10.0 * tol,
        max_pairwise_tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_state_stationary_law() {
        let p = KernelMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], "two_state").unwrap();
        let rep = invariant_measure(&p, 1e-13, 10_000, 1).unwrap();
        assert!(rep.converged && rep.unique);
        assert_abs_diff_eq!(rep.pi.weights()[0], 2.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.pi.weights()[1], 1.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn doubly_stochastic_gives_uniform() {
        let p = KernelMatrix::from_rows(
            &[vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]],
            "doubly_stochastic",
        )
        .unwrap();
        let rep = invariant_measure(&p, 1e-12, 10_000, 2).unwrap();
        for w in rep.pi.weights() {
            assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn identity_is_not_unique() {
        let rep = invariant_measure(&KernelMatrix::identity(4), 1e-10, 100, 3).unwrap();
        assert!(rep.converged);
        assert!(!rep.unique);
    }

    #[test]
    fn periodic_chain_fails_the_uniqueness_probe() {
        let p = KernelMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], "flip").unwrap();
        let rep = invariant_measure(&p, 1e-10, 50, 4).unwrap();
        assert!(rep.converged);
        assert!(!rep.unique);
        assert!(invariant_measure(&p, -1.0, 50, 4).is_err());
    }
}
