//! Exact solver for the balanced transportation problem.
//!
//! Minimizes `Σ T[i][j]·c[i][j]` subject to row sums equal to the supplies,
//! column sums equal to the demands and `T ≥ 0`. The solver is the
//! transportation form of the network simplex: a basis is a spanning tree
//! of the complete bipartite row/column graph with `m + n - 1` basic cells,
//! potentials are propagated along the tree and the entering cell closes a
//! unique cycle along which flow is shifted.
//!
//! Pricing is Dantzig's rule (most negative reduced cost). After a run of
//! degenerate pivots the solver switches to Bland's rule until flow moves
//! again, which rules out cycling.

use crate::error::{Error, Result};

/// Flows of an optimal (or feasible) transportation plan, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    flows: Vec<f64>,
    objective: f64,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flows[i * self.cols + j]
    }

    pub fn flows(&self) -> &[f64] {
        &self.flows
    }

    /// Σ T[i][j]·c[i][j] for the cost matrix the plan was solved with.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.flows
            .chunks(self.cols)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.flows.chunks(self.cols) {
            for (s, f) in sums.iter_mut().zip(row) {
                *s += f;
            }
        }
        sums
    }

    /// True when all flows are non-negative and both marginals match
    /// within `tol`.
    pub fn satisfies_marginals(&self, supply: &[f64], demand: &[f64], tol: f64) -> bool {
        self.flows.iter().all(|&f| f >= 0.0)
            && supply.len() == self.rows
            && demand.len() == self.cols
            && self
                .row_sums()
                .iter()
                .zip(supply)
                .all(|(r, s)| (r - s).abs() <= tol)
            && self
                .col_sums()
                .iter()
                .zip(demand)
                .all(|(c, d)| (c - d).abs() <= tol)
    }
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 16;

struct Tree {
    /// Basic cells as flat `i * cols + j` indices.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    flows: Vec<f64>,
}

/// Solves the transportation problem with `cost` given row-major
/// (`supply.len()` rows, `demand.len()` columns).
///
/// Supplies and demands must be non-negative and finite with equal totals
/// up to `1e-7`.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidTransport("empty marginal".into()));
    }
    if cost.len() != m * n {
        return Err(Error::InvalidTransport(format!(
            "cost matrix has {} entries, expected {}",
            cost.len(),
            m * n
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCost);
    }
    if supply
        .iter()
        .chain(demand)
        .any(|x| !x.is_finite() || *x < 0.0)
    {
        return Err(Error::InvalidTransport(
            "masses must be finite and non-negative".into(),
        ));
    }
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    if (total_supply - total_demand).abs() > 1e-7 {
        return Err(Error::InvalidTransport(format!(
            "unbalanced problem: supply {total_supply} vs demand {total_demand}"
        )));
    }

    let mut tree = northwest_corner(supply, demand);
    let max_cost = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-12 * (1.0 + max_cost);
    let max_pivots = 50 * m * n + 1000;

    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    let mut degenerate_run = 0usize;

    for _ in 0..max_pivots {
        build_adjacency(&tree, m, n, &mut adjacency);
        potentials(&adjacency, cost, m, &mut u, &mut v);

        let bland = degenerate_run >= DEGENERATE_STREAK;
        let Some(entering) = price(&tree, cost, &u, &v, m, n, tol, bland) else {
            let objective = tree.basis.iter().map(|&c| tree.flows[c] * cost[c]).sum();
            return Ok(TransportPlan {
                rows: m,
                cols: n,
                flows: tree.flows,
                objective,
            });
        };

        let cycle = tree_path(&adjacency, entering / n, m + entering % n);
        // Cells along the tree path from the entering column back to the
        // entering row alternate: first loses flow, second gains, ...
        let (theta, leaving) = cycle
            .iter()
            .step_by(2)
            .map(|&c| (tree.flows[c], c))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("cycle has at least one donor cell");

        if theta > 0.0 {
            for (k, &c) in cycle.iter().enumerate() {
                if k % 2 == 0 {
                    tree.flows[c] -= theta;
                } else {
                    tree.flows[c] += theta;
                }
            }
            degenerate_run = 0;
        } else {
            degenerate_run += 1;
        }
        tree.flows[entering] = theta;
        tree.flows[leaving] = 0.0;

        tree.in_basis[leaving] = false;
        tree.in_basis[entering] = true;
        let slot = tree
            .basis
            .iter()
            .position(|&c| c == leaving)
            .expect("leaving cell is basic");
        tree.basis[slot] = entering;
    }
    Err(Error::SolverNonConvergence {
        iterations: max_pivots,
    })
}

/// Initial basic feasible solution. The staircase walk always yields
/// exactly `m + n - 1` cells forming a spanning tree, degenerate or not.
fn northwest_corner(supply: &[f64], demand: &[f64]) -> Tree {
    let (m, n) = (supply.len(), demand.len());
    let mut rest_s = supply.to_vec();
    let mut rest_d = demand.to_vec();
    let mut tree = Tree {
        basis: Vec::with_capacity(m + n - 1),
        in_basis: vec![false; m * n],
        flows: vec![0.0; m * n],
    };
    let (mut i, mut j) = (0, 0);
    loop {
        let x = if i == m - 1 && j == n - 1 {
            // Absorb rounding residue in the final cell.
            rest_s[i].max(rest_d[j]).max(0.0)
        } else {
            rest_s[i].min(rest_d[j])
        };
        let c = i * n + j;
        tree.basis.push(c);
        tree.in_basis[c] = true;
        tree.flows[c] = x;
        rest_s[i] -= x;
        rest_d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && rest_s[i] <= rest_d[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    tree
}

/// Node ids: rows are `0..m`, columns are `m..m + n`.
fn build_adjacency(tree: &Tree, m: usize, n: usize, adjacency: &mut [Vec<(usize, usize)>]) {
    for list in adjacency.iter_mut() {
        list.clear();
    }
    for &c in &tree.basis {
        let (i, j) = (c / n, m + c % n);
        adjacency[i].push((j, c));
        adjacency[j].push((i, c));
    }
}

/// Solves `u[i] + v[j] = cost[i][j]` on every basic cell with `u[0] = 0`.
fn potentials(
    adjacency: &[Vec<(usize, usize)>],
    cost: &[f64],
    m: usize,
    u: &mut [f64],
    v: &mut [f64],
) {
    let mut visited = vec![false; adjacency.len()];
    let mut stack = vec![0usize];
    visited[0] = true;
    u[0] = 0.0;
    while let Some(node) = stack.pop() {
        for &(next, c) in &adjacency[node] {
            if visited[next] {
                continue;
            }
            visited[next] = true;
            if next >= m {
                v[next - m] = cost[c] - u[node];
            } else {
                u[next] = cost[c] - v[node - m];
            }
            stack.push(next);
        }
    }
    debug_assert!(visited.iter().all(|&x| x), "basis is not a spanning tree");
}

#[allow(clippy::too_many_arguments)]
fn price(
    tree: &Tree,
    cost: &[f64],
    u: &[f64],
    v: &[f64],
    m: usize,
    n: usize,
    tol: f64,
    bland: bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &ui) in u.iter().enumerate().take(m) {
        for (j, &vj) in v.iter().enumerate().take(n) {
            let c = i * n + j;
            if tree.in_basis[c] {
                continue;
            }
            let reduced = cost[c] - ui - vj;
            if reduced < -tol {
                if bland {
                    return Some(c);
                }
                if best.is_none_or(|(_, r)| reduced < r) {
                    best = Some((c, reduced));
                }
            }
        }
    }
    best.map(|(c, _)| c)
}

/// Basic cells on the tree path from node `from` to node `to`, in order
/// starting at `from`.
fn tree_path(adjacency: &[Vec<(usize, usize)>], to: usize, from: usize) -> Vec<usize> {
    // Parent pointers of a traversal rooted at `to`.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; adjacency.len()];
    let mut visited = vec![false; adjacency.len()];
    let mut stack = vec![to];
    visited[to] = true;
    while let Some(node) = stack.pop() {
        if node == from {
            break;
        }
        for &(next, c) in &adjacency[node] {
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some((node, c));
                stack.push(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = from;
    while node != to {
        let (up, c) = parent[node].expect("tree is connected");
        path.push(c);
        node = up;
    }
    path
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn single_cell() {
        let plan = solve(&[1.0], &[1.0], &[2.5]).unwrap();
        assert_eq!(plan.objective(), 2.5);
        assert_eq!(plan.flow(0, 0), 1.0);
    }

    #[test]
    fn identity_cost_diagonal() {
        let masses = [0.2, 0.3, 0.5];
        let mut cost = vec![1.0; 9];
        for i in 0..3 {
            cost[i * 3 + i] = 0.0;
        }
        let plan = solve(&masses, &masses, &cost).unwrap();
        assert_abs_diff_eq!(plan.objective(), 0.0, epsilon = 1e-15);
        for (i, &mass) in masses.iter().enumerate() {
            assert_abs_diff_eq!(plan.flow(i, i), mass, epsilon = 1e-15);
        }
    }

    #[test]
    fn classic_textbook_instance() {
        // Optimum cross-checked with an external LP solver.
        let supply = [20.0, 30.0, 25.0];
        let demand = [10.0, 25.0, 40.0];
        let cost = [8.0, 6.0, 10.0, 9.0, 12.0, 13.0, 14.0, 9.0, 16.0];
        let plan = solve(&supply, &demand, &cost).unwrap();
        assert!(plan.satisfies_marginals(&supply, &demand, 1e-9));
        let recomputed: f64 = plan.flows().iter().zip(&cost).map(|(f, c)| f * c).sum();
        assert_abs_diff_eq!(plan.objective(), recomputed, epsilon = 1e-9);
        assert_abs_diff_eq!(plan.objective(), 775.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            solve(&[1.0], &[1.0], &[f64::NAN]),
            Err(Error::NonFiniteCost)
        ));
        assert!(solve(&[1.0], &[0.5], &[1.0]).is_err());
        assert!(solve(&[], &[1.0], &[]).is_err());
        assert!(solve(&[1.0], &[1.0], &[1.0, 2.0]).is_err());
        assert!(solve(&[-1.0, 2.0], &[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn degenerate_marginals() {
        // Partial sums coincide, forcing zero-flow basic cells.
        let supply = [0.25, 0.25, 0.25, 0.25];
        let demand = [0.5, 0.5];
        let cost = [3.0, 1.0, 1.0, 3.0, 2.0, 2.0, 0.0, 5.0];
        let plan = solve(&supply, &demand, &cost).unwrap();
        assert!(plan.satisfies_marginals(&supply, &demand, 1e-12));
        // Rows 0 and 3 have strong preferences (col 1 and col 0); rows 1
        // and 2 fill the rest: 0.25*1 + 0.25*0 + 0.25*1 + 0.25*2.
        assert_abs_diff_eq!(plan.objective(), 1.0, epsilon = 1e-12);
    }
}
