//! Helpers shared by the integration tests.
#![allow(dead_code)]

use mmlp::instance::{Edge, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimum by enumerating the vertices of
/// `{(x, ω) : Ax ≤ 1, ω ≤ Cx, x ≥ 0}`. Infinite when there are no
/// objectives. Only for a handful of agents.
pub fn brute_force_optimum(inst: &Instance) -> f64 {
    if inst.n_objectives() == 0 {
        return f64::INFINITY;
    }
    let n = inst.n_agents();
    let dim = n + 1;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..inst.n_constraints() {
        let mut row = vec![0.0; dim];
        for e in inst.constraint_members(i) {
            row[e.agent] += e.coef;
        }
        rows.push((row, 1.0));
    }
    for k in 0..inst.n_objectives() {
        let mut row = vec![0.0; dim];
        for e in inst.objective_members(k) {
            row[e.agent] -= e.coef;
        }
        row[n] = 1.0;
        rows.push((row, 0.0));
    }
    for v in 0..n {
        let mut row = vec![0.0; dim];
        row[v] = -1.0;
        rows.push((row, 0.0));
    }
    let mut best = f64::NEG_INFINITY;
    for subset in subsets(rows.len(), dim) {
        let Some(z) = solve_square(&subset.iter().map(|&j| rows[j].clone()).collect::<Vec<_>>())
        else {
            continue;
        };
        let feasible = rows.iter().all(|(row, rhs)| dot(row, &z) <= rhs + 1e-9);
        if feasible {
            best = best.max(z[n]);
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for j in start..n {
            current.push(j);
            go(j + 1, n, k, current, out);
            current.pop();
        }
    }
    go(0, n, k, &mut current, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_square(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|(r, b)| r.iter().copied().chain([*b]).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                let pivot = m[col].clone();
                for (a, b) in m[r][col..=n].iter_mut().zip(&pivot[col..=n]) {
                    *a -= f * b;
                }
            }
        }
    }
    Some((0..n).map(|r| m[r][n] / m[r][r]).collect())
}

/// A normalized ring of `units` objectives `{v_{2j}, v_{2j+1}}` joined by
/// constraints `{v_{2j+1}, v_{2j+2}}`, with seeded random coefficients.
pub fn ring(units: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * units;
    let mut ce = Vec::new();
    let mut oe = Vec::new();
    for j in 0..units {
        oe.push(Edge::new(2 * j, j, 1.0, 2, 1));
        oe.push(Edge::new(2 * j + 1, j, 1.0, 2, 2));
        let a: f64 = (rng.gen_range(0.1..10.0f64) * 100.0).round() / 100.0;
        let b: f64 = (rng.gen_range(0.1..10.0f64) * 100.0).round() / 100.0;
        ce.push(Edge::new(2 * j + 1, j, a, 1, 1));
        ce.push(Edge::new((2 * j + 2) % n, j, b, 1, 2));
    }
    Instance::new(n, units, units, ce, oe)
}
