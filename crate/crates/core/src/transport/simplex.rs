//! Transportation simplex on a dense cost matrix.
//!
//! Starts from the north-west corner basis, prices with the u/v potentials of
//! the spanning tree and pivots along the unique tree cycle. Long runs of
//! degenerate pivots switch pricing to Bland's rule, which cannot cycle.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
struct Cell {
    i: usize,
    j: usize,
    x: f64,
}

/// Optimal basic solution.
pub(crate) struct Solution {
    pub value: f64,
    /// Basic cells `(i, j, mass)`; zero-mass basics are dropped.
    pub flows: Vec<(usize, usize, f64)>,
}

/// Minimizes Σ c_ij x_ij over the transportation polytope with the given
/// margins. `cost` is row-major `m × n`; margins must have equal totals up
/// to rounding (the last column absorbs the residual).
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Solution> {
    let (m, n) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), m * n);
    if m == 0 || n == 0 {
        return Err(Error::Solver("empty margins".into()));
    }
    let mut cells = north_west(supply, demand);
    let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * scale;

    let nodes = m + n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (k, c) in cells.iter().enumerate() {
        adj[c.i].push(k);
        adj[m + c.j].push(k);
    }
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut seen = vec![false; nodes];
    let mut stack = Vec::with_capacity(nodes);
    let mut parent: Vec<Option<usize>> = vec![None; nodes];

    let max_iter = 50 * m * n + 1000;
    let mut degenerate_run = 0usize;
    let mut bland = false;

    for _ in 0..max_iter {
        potentials(&cells, &adj, cost, n, m, &mut u, &mut v, &mut seen, &mut stack);

        let entering = if bland {
            let mut found = None;
            'scan: for i in 0..m {
                for j in 0..n {
                    if cost[i * n + j] - u[i] - v[j] < -tol {
                        found = Some((i, j));
                        break 'scan;
                    }
                }
            }
            found
        } else {
            let mut best = -tol;
            let mut found = None;
            for i in 0..m {
                let row = &cost[i * n..(i + 1) * n];
                for j in 0..n {
                    let d = row[j] - u[i] - v[j];
                    if d < best {
                        best = d;
                        found = Some((i, j));
                    }
                }
            }
            found
        };
        let Some((ei, ej)) = entering else {
            let value = cells.iter().map(|c| c.x * cost[c.i * n + c.j]).sum();
            let flows = cells.iter().filter(|c| c.x > 0.0).map(|c| (c.i, c.j, c.x)).collect();
            return Ok(Solution { value, flows });
        };

        // Tree path from column node m+ej back to row node ei.
        tree_parents(ei, &cells, &adj, m, &mut parent, &mut seen, &mut stack);
        let mut path = Vec::new();
        let mut node = m + ej;
        while node != ei {
            let k = parent[node].ok_or_else(|| Error::Solver("basis is not a spanning tree".into()))?;
            path.push(k);
            let c = cells[k];
            node = if node == c.i { m + c.j } else { c.i };
        }
        // path[0] touches column ej and gets -θ, then signs alternate.
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let c = cells[k];
                let better = c.x < theta
                    || (c.x == theta && leave != usize::MAX && {
                        let l = cells[leave];
                        (c.i, c.j) < (l.i, l.j)
                    });
                if better {
                    theta = c.x;
                    leave = k;
                }
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                cells[k].x -= theta;
            } else {
                cells[k].x += theta;
            }
        }
        if theta <= tol * 1e-3 {
            degenerate_run += 1;
            if degenerate_run > 2 * (m + n) {
                bland = true;
            }
        } else {
            degenerate_run = 0;
            bland = false;
        }

        let old = cells[leave];
        adj[old.i].retain(|&k| k != leave);
        adj[m + old.j].retain(|&k| k != leave);
        cells[leave] = Cell { i: ei, j: ej, x: theta };
        adj[ei].push(leave);
        adj[m + ej].push(leave);
        for &k in &path {
            if cells[k].x < 0.0 {
                cells[k].x = 0.0;
            }
        }
    }
    Err(Error::Solver(format!("no convergence within {max_iter} pivots")))
}

fn north_west(supply: &[f64], demand: &[f64]) -> Vec<Cell> {
    let (m, n) = (supply.len(), demand.len());
    let mut ra = supply.to_vec();
    let mut rb = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        if i == m - 1 && j == n - 1 {
            // Absorbs any rounding mismatch between the two totals.
            cells.push(Cell { i, j, x: ra[i].max(0.0) });
            break;
        }
        let x = ra[i].min(rb[j]).max(0.0);
        cells.push(Cell { i, j, x });
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

#[allow(clippy::too_many_arguments)]
fn potentials(
    cells: &[Cell],
    adj: &[Vec<usize>],
    cost: &[f64],
    n: usize,
    m: usize,
    u: &mut [f64],
    v: &mut [f64],
    seen: &mut [bool],
    stack: &mut Vec<usize>,
) {
    seen.iter_mut().for_each(|s| *s = false);
    stack.clear();
    u[0] = 0.0;
    seen[0] = true;
    stack.push(0);
    while let Some(node) = stack.pop() {
        for &k in &adj[node] {
            let c = cells[k];
            let (other, is_col) = if node < m { (m + c.j, true) } else { (c.i, false) };
            if seen[other] {
                continue;
            }
            seen[other] = true;
            if is_col {
                v[c.j] = cost[c.i * n + c.j] - u[c.i];
            } else {
                u[c.i] = cost[c.i * n + c.j] - v[c.j];
            }
            stack.push(other);
        }
    }
}

fn tree_parents(
    root: usize,
    cells: &[Cell],
    adj: &[Vec<usize>],
    m: usize,
    parent: &mut [Option<usize>],
    seen: &mut [bool],
    stack: &mut Vec<usize>,
) {
    seen.iter_mut().for_each(|s| *s = false);
    parent.iter_mut().for_each(|p| *p = None);
    stack.clear();
    seen[root] = true;
    stack.push(root);
    while let Some(node) = stack.pop() {
        for &k in &adj[node] {
            let c = cells[k];
            let other = if node < m { m + c.j } else { c.i };
            if !seen[other] {
                seen[other] = true;
                parent[other] = Some(k);
                stack.push(other);
            }
        }
    }
}
