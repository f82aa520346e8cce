//! Dense tableau simplex with Bland's rule, used as the exact oracle.

use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};

/// Pivot and optimality threshold.
pub const PIVOT_TOL: f64 = 1e-9;

struct Tableau {
    /// `m` constraint rows followed by the objective row; the last column is
    /// the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn new(rows: Vec<Vec<f64>>, basis: Vec<usize>, cols: usize) -> Self {
        Tableau { rows, basis, cols }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    /// Installs `cost` (maximized) as the objective row, expressed in the
    /// current basis: entry j holds `c_B B^-1 A_j - c_j`.
    fn set_objective(&mut self, cost: &[f64]) {
        let mut z = vec![0.0; self.cols + 1];
        for (j, &c) in cost.iter().enumerate() {
            z[j] = -c;
        }
        for i in 0..self.m() {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (zj, a) in z.iter_mut().zip(&self.rows[i]) {
                    *zj += cb * a;
                }
            }
        }
        if self.rows.len() > self.m() {
            self.rows.pop();
        }
        self.rows.push(z);
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule: the lowest-index improving column enters; ties in the
    /// ratio test go to the lowest basic index.
    fn run(&mut self, allowed: &[bool]) -> Outcome {
        let m = self.m();
        loop {
            let z = &self.rows[m];
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && z[j] < -PIVOT_TOL) else {
                return Outcome::Optimal;
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..m {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.cols] / a;
                    best = match best {
                        None => Some((ratio, i)),
                        Some((br, bi)) => {
                            if ratio < br - PIVOT_TOL * (1.0 + br.abs())
                                || (ratio <= br + PIVOT_TOL * (1.0 + br.abs())
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((ratio, i))
                            } else {
                                Some((br, bi))
                            }
                        }
                    };
                }
            }
            let Some((_, r)) = best else {
                return Outcome::Unbounded;
            };
            self.pivot(r, c);
        }
    }

    fn value_of(&self, j: usize) -> f64 {
        self.basis
            .iter()
            .position(|&b| b == j)
            .map_or(0.0, |i| self.rows[i][self.cols])
    }
}

/// Maximizes `c·x` subject to `A x ≤ b`, `x ≥ 0`, with `b ≥ 0`.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "{m} rows, {} bounds, {n} variables",
            b.len()
        )));
    }
    if b.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument(
            "right-hand sides must be nonnegative".into(),
        ));
    }
    let cols = n + m;
    let rows = (0..m)
        .map(|i| {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[cols] = b[i];
            row
        })
        .collect();
    let mut t = Tableau::new(rows, (n..n + m).collect(), cols);
    t.set_objective(c);
    match t.run(&vec![true; cols]) {
        Outcome::Unbounded => Err(Error::UnboundedLp),
        Outcome::Optimal => {
            let x: Vec<f64> = (0..n).map(|j| t.value_of(j).max(0.0)).collect();
            Ok((c.iter().zip(&x).map(|(c, x)| c * x).sum(), x))
        }
    }
}

/// Answer of [`lp_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub enum LpFeasibility {
    Feasible {
        witness: Vec<f64>,
    },
    /// The smallest total violation of the covering rows phase one could
    /// reach; positive.
    Infeasible {
        residual: f64,
    },
}

impl LpFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpFeasibility::Feasible { .. })
    }
}

/// Decides `A x ≤ 1`, `C x ≥ ω`, `x ≥ 0` by a phase-one simplex.
pub fn lp_feasible(a: &[Vec<f64>], c: &[Vec<f64>], omega: f64, tol: f64) -> Result<LpFeasibility> {
    let n = a.first().or(c.first()).map_or(0, Vec::len);
    if a.iter().chain(c).any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(
            "rows have different lengths".into(),
        ));
    }
    if omega <= 0.0 {
        return Ok(LpFeasibility::Feasible {
            witness: vec![0.0; n],
        });
    }
    let (ma, mc) = (a.len(), c.len());
    // Columns: x, slacks of A rows, surplus of C rows, artificials of C rows.
    let cols = n + ma + 2 * mc;
    let mut rows = Vec::with_capacity(ma + mc);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![0.0; cols + 1];
        r[..n].copy_from_slice(row);
        r[n + i] = 1.0;
        r[cols] = 1.0;
        rows.push(r);
    }
    for (k, row) in c.iter().enumerate() {
        let mut r = vec![0.0; cols + 1];
        r[..n].copy_from_slice(row);
        r[n + ma + k] = -1.0;
        r[n + ma + mc + k] = 1.0;
        r[cols] = omega;
        rows.push(r);
    }
    let basis = (n..n + ma).chain(n + ma + mc..cols).collect();
    let mut t = Tableau::new(rows, basis, cols);
    let mut cost = vec![0.0; cols];
    for x in &mut cost[n + ma + mc..] {
        *x = -1.0;
    }
    t.set_objective(&cost);
    t.run(&vec![true; cols]);
    let residual = -t.rows[ma + mc][cols];
    if residual > tol {
        return Ok(LpFeasibility::Infeasible { residual });
    }
    Ok(LpFeasibility::Feasible {
        witness: (0..n).map(|j| t.value_of(j).max(0.0)).collect(),
    })
}

/// Dense rows `A` and `C` of an instance.
pub fn dense_rows(inst: &Instance) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = inst.n_agents();
    let mut a = vec![vec![0.0; n]; inst.n_constraints()];
    for e in inst.constraint_edges() {
        a[e.node][e.agent] = e.coef;
    }
    let mut c = vec![vec![0.0; n]; inst.n_objectives()];
    for e in inst.objective_edges() {
        c[e.node][e.agent] = e.coef;
    }
    (a, c)
}

fn ensure_bounded(inst: &Instance) -> Result<()> {
    inst.ensure_valid()?;
    let unbounded: Vec<usize> = (0..inst.n_agents())
        .filter(|&v| {
            inst.agent_objectives(v).next().is_some() && inst.agent_constraints(v).next().is_none()
        })
        .collect();
    if unbounded.is_empty() {
        Ok(())
    } else {
        Err(Error::Unbounded { agents: unbounded })
    }
}

/// Optimum of the max-min LP and an optimal solution, from one simplex run
/// on `max ω` subject to `A x ≤ 1` and `ω - C_k x ≤ 0`.
pub fn solve_exact(inst: &Instance) -> Result<(f64, Solution)> {
    ensure_bounded(inst)?;
    let n = inst.n_agents();
    if inst.n_objectives() == 0 {
        return Ok((f64::INFINITY, Solution::zeros(n)));
    }
    if (0..inst.n_objectives()).any(|k| inst.objective_members(k).next().is_none()) {
        return Ok((0.0, Solution::zeros(n)));
    }
    let (a, c) = dense_rows(inst);
    let mut rows = Vec::with_capacity(a.len() + c.len());
    let mut b = Vec::with_capacity(rows.capacity());
    for row in &a {
        let mut r = row.clone();
        r.push(0.0);
        rows.push(r);
        b.push(1.0);
    }
    for row in &c {
        let mut r: Vec<f64> = row.iter().map(|x| -x).collect();
        r.push(1.0);
        rows.push(r);
        b.push(0.0);
    }
    let mut cost = vec![0.0; n + 1];
    cost[n] = 1.0;
    let (_, z) = maximize(&rows, &b, &cost)?;
    let x = Solution::new(z[..n].to_vec());
    let omega = crate::instance::utility(inst, &x)?;
    Ok((omega, x))
}

/// Bisection on `ω` over `[0, ω_max]` with [`lp_feasible`]; returns the
/// largest feasible value found and its witness.
pub fn solve_exact_bisection(inst: &Instance, tol: f64) -> Result<(f64, Solution)> {
    ensure_bounded(inst)?;
    let n = inst.n_agents();
    let (a, c) = dense_rows(inst);
    let hi0 = (0..inst.n_objectives())
        .map(|k| {
            inst.objective_members(k)
                .map(|e| e.coef * inst.capacity(e.agent))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, hi0);
    let mut witness = vec![0.0; n];
    if let LpFeasibility::Feasible { witness: w } = lp_feasible(&a, &c, hi, PIVOT_TOL)? {
        return Ok((hi, Solution::new(w)));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match lp_feasible(&a, &c, mid, PIVOT_TOL)? {
            LpFeasibility::Feasible { witness: w } => {
                lo = mid;
                witness = w;
            }
            LpFeasibility::Infeasible { .. } => hi = mid,
        }
    }
    Ok((lo, Solution::new(witness)))
}
