//! Exhaustive enumeration of basic feasible transport plans.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Largest `m·n` the enumerator accepts.
pub const ORACLE_CELLS: usize = 16;

/// Minimum of Σ c_ij x_ij over every basic feasible solution.
///
/// Each choice of `m + n − 1` cells forming a spanning tree of the bipartite
/// support graph is solved by leaf elimination; non-negative solutions are
/// vertices of the polytope. Plans are deduplicated at 1e-12 resolution.
pub(crate) fn enumerate(a: &[f64], b: &[f64], cost: &[f64]) -> Result<(f64, Vec<(usize, usize, f64)>)> {
    let (m, n) = (a.len(), b.len());
    if m * n > ORACLE_CELLS {
        return Err(Error::OracleLimit { m, n });
    }
    let cells = m * n;
    let k = m + n - 1;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut best: Option<(f64, Vec<(usize, usize, f64)>)> = None;

    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells).filter(|c| mask >> c & 1 == 1).map(|c| (c / n, c % n)).collect();
        if !is_tree(&chosen, m, n) {
            continue;
        }
        let Some(x) = solve_tree(&chosen, a, b) else { continue };
        if x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut key = vec![0i64; cells];
        for (&(i, j), &v) in chosen.iter().zip(&x) {
            key[i * n + j] = (v.max(0.0) * 1e12).round() as i64;
        }
        if !seen.insert(key) {
            continue;
        }
        let value: f64 = chosen.iter().zip(&x).map(|(&(i, j), v)| v.max(0.0) * cost[i * n + j]).sum();
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            let plan = chosen.iter().zip(&x).filter(|(_, v)| **v > 0.0).map(|(&(i, j), &v)| (i, j, v)).collect();
            best = Some((value, plan));
        }
    }
    best.ok_or_else(|| Error::Solver("no basic feasible solution found".into()))
}

fn is_tree(edges: &[(usize, usize)], m: usize, n: usize) -> bool {
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, m + j));
        if ri == rj {
            return false;
        }
        parent[ri] = rj;
    }
    true
}

/// Solves the tree system by repeatedly peeling leaves.
fn solve_tree(edges: &[(usize, usize)], a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let nodes = m + b.len();
    let mut residual: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut degree = vec![0usize; nodes];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut alive = vec![true; edges.len()];
    let mut x = vec![0.0; edges.len()];
    for _ in 0..edges.len() {
        let leaf = (0..nodes).find(|&v| degree[v] == 1)?;
        let e = (0..edges.len()).find(|&e| alive[e] && (edges[e].0 == leaf || m + edges[e].1 == leaf))?;
        let (i, j) = edges[e];
        let other = if leaf == i { m + j } else { i };
        x[e] = residual[leaf];
        residual[other] -= x[e];
        residual[leaf] = 0.0;
        alive[e] = false;
        degree[leaf] -= 1;
        degree[other] -= 1;
    }
    Some(x)
}
