//! The local algorithm on normalized instances.
//!
//! For every agent `u` the alternating tree `A_u` yields an upper bound
//! `t_u` found by bisection over the `f` recursion. Smoothing takes
//! `s_v = min t_u` over agents within distance `4r+2`, the `g` recursion
//! runs on `s`, and every agent outputs the average of its `g` values.
//! The `f` and `g` recursions share [`residual`] and [`deficit`], so values
//! computed on matching inputs agree bit for bit.

mod layers;

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

pub use layers::{assign_layers, averaged_shift, shift_solution, LayerAssignment, Role};

use crate::error::{Error, Result};
use crate::instance::{Instance, Node, NodeKind, Solution};
use crate::transform::NormalizedInstance;
use crate::unfold::{alternating_tree, AlternatingTree};

/// Bisection iterations at most.
pub const BISECTION_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    period: usize,
    bisect_tol: f64,
    horizon: usize,
}

impl Params {
    /// `period` is `R ≥ 2`; the horizon defaults to `12r + 7`.
    pub fn new(period: usize, bisect_tol: f64) -> Result<Self> {
        if period < 2 {
            return Err(Error::InvalidArgument(format!(
                "R must be at least 2, got {period}"
            )));
        }
        if !(bisect_tol > 0.0 && bisect_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {bisect_tol}"
            )));
        }
        Ok(Params {
            period,
            bisect_tol,
            horizon: Self::min_horizon(period),
        })
    }

    pub fn min_horizon(period: usize) -> usize {
        12 * (period - 2) + 7
    }

    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if horizon < Self::min_horizon(self.period) {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} is below 12r+7 = {}",
                Self::min_horizon(self.period)
            )));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn r(&self) -> usize {
        self.period - 2
    }

    pub fn bisect_tol(&self) -> f64 {
        self.bisect_tol
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// `(1 - a_partner · lower) / a_own`; a missing partner contributes 0.
#[inline]
pub(crate) fn residual(a_own: f64, partner: Option<(f64, f64)>) -> f64 {
    let used = partner.map_or(0.0, |(a, lower)| a * lower);
    (1.0 - used) / a_own
}

/// `max(0, target - Σ upper)`, summed in the given order.
#[inline]
pub(crate) fn deficit(target: f64, upper: impl Iterator<Item = f64>) -> f64 {
    let sum = upper.fold(0.0, |acc, x| acc + x);
    (target - sum).max(0.0)
}

/// Values of the `f` recursion on one alternating tree at one `ω`.
/// `plus` is set on down-agents, `minus` on up-agents (including the
/// root); other entries are NaN.
#[derive(Clone, Debug)]
pub struct FTable {
    pub omega: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl FTable {
    pub fn new(tree: &AlternatingTree, omega: f64) -> Self {
        let n = tree.len();
        let mut plus = vec![f64::NAN; n];
        let mut minus = vec![f64::NAN; n];
        for w in (0..n).rev() {
            let node = tree.node(w);
            if tree.is_down_agent(w) {
                plus[w] = node
                    .children
                    .iter()
                    .map(|&c| {
                        let partner = tree
                            .node(c)
                            .children
                            .first()
                            .map(|&p| (tree.node(p).coef, minus[p]));
                        residual(tree.node(c).coef, partner)
                    })
                    .fold(f64::INFINITY, f64::min);
            } else if tree.is_up_agent(w) {
                let k = objective_child(tree, w);
                minus[w] = deficit(omega, tree.node(k).children.iter().map(|&c| plus[c]));
            }
        }
        FTable { omega, plus, minus }
    }

    /// Nonnegative `f⁺` everywhere and `f⁻_u` within `u`'s capacities.
    pub fn is_feasible(&self, tree: &AlternatingTree) -> bool {
        let root_cap = tree
            .node(0)
            .children
            .iter()
            .filter(|&&c| tree.node(c).node.kind() == NodeKind::Constraint)
            .map(|&c| 1.0 / tree.node(c).coef)
            .fold(f64::INFINITY, f64::min);
        self.minus[0] <= root_cap
            && (0..tree.len())
                .filter(|&w| tree.is_down_agent(w))
                .all(|w| self.plus[w] >= 0.0)
    }

    /// One row per agent of the tree.
    pub fn to_tsv(&self, tree: &AlternatingTree) -> String {
        let mut out = String::from("node\tinstance\tlevel\td\tf_plus\tf_minus\n");
        for w in 0..tree.len() {
            if let Some(d) = tree.recursion_depth(w) {
                let n = tree.node(w);
                writeln!(
                    out,
                    "{w}\t{}\t{}\t{d}\t{:?}\t{:?}",
                    n.node, n.level, self.plus[w], self.minus[w]
                )
                .unwrap();
            }
        }
        out
    }
}

fn objective_child(tree: &AlternatingTree, w: usize) -> usize {
    *tree
        .node(w)
        .children
        .iter()
        .find(|&&c| tree.node(c).node.kind() == NodeKind::Objective)
        .expect("up-agent has its objective in the tree")
}

pub fn f_feasible(tree: &AlternatingTree, omega: f64) -> bool {
    FTable::new(tree, omega).is_feasible(tree)
}

/// `max_k Σ_{v ∈ V_k} c_kv min_i 1/a_iv` over the tree's own nodes and edges.
pub fn omega_max(tree: &AlternatingTree) -> f64 {
    let cap = |w: usize| {
        let n = tree.node(w);
        let parent = n
            .parent
            .filter(|&p| tree.node(p).node.kind() == NodeKind::Constraint)
            .map(|_| n.coef);
        n.children
            .iter()
            .filter(|&&c| tree.node(c).node.kind() == NodeKind::Constraint)
            .map(|&c| tree.node(c).coef)
            .chain(parent)
            .map(|a| 1.0 / a)
            .fold(f64::INFINITY, f64::min)
    };
    (0..tree.len())
        .filter(|&w| tree.node(w).node.kind() == NodeKind::Objective)
        .map(|k| {
            let n = tree.node(k);
            let up = n.parent.map(|p| n.coef * cap(p));
            n.children
                .iter()
                .map(|&c| tree.node(c).coef * cap(c))
                .chain(up)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Largest feasible `ω` found by bisection on `[0, ω_max]`; never returns an
/// infeasible value.
pub fn compute_t(tree: &AlternatingTree, tol: f64) -> f64 {
    let mut hi = omega_max(tree);
    if f_feasible(tree, hi) {
        return hi;
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f_feasible(tree, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `t_u` for every agent, in parallel.
pub fn compute_all_t(inst: &NormalizedInstance, r: usize, tol: f64) -> Result<Vec<f64>> {
    let inst = inst.instance();
    (0..inst.n_agents())
        .into_par_iter()
        .map(|u| alternating_tree(inst, u, r).map(|t| compute_t(&t, tol)))
        .collect()
}

/// Agents within `radius` of `v`, by breadth-first search.
pub(crate) fn ball_agents(inst: &Instance, v: usize, radius: usize) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::from([(Node::Agent(v), 0usize)]);
    seen.insert(Node::Agent(v));
    let mut agents = Vec::new();
    while let Some((x, d)) = queue.pop_front() {
        if let Node::Agent(a) = x {
            agents.push(a);
        }
        if d == radius {
            continue;
        }
        for &e in inst.incident(x) {
            let y = inst.opposite(e, x);
            if seen.insert(y) {
                queue.push_back((y, d + 1));
            }
        }
    }
    agents
}

/// `s_v = min t_u` over agents `u` within distance `4r+2` of `v`.
pub fn compute_s(inst: &NormalizedInstance, t: &[f64], r: usize) -> Result<Vec<f64>> {
    let inst = inst.instance();
    if t.len() != inst.n_agents() {
        return Err(Error::DimensionMismatch(format!(
            "{} t values for {} agents",
            t.len(),
            inst.n_agents()
        )));
    }
    Ok((0..inst.n_agents())
        .into_par_iter()
        .map(|v| {
            ball_agents(inst, v, 4 * r + 2)
                .into_iter()
                .map(|u| t[u])
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// `plus[d][v]` and `minus[d][v]` for `d = 0..=r`, and the `s` they were
/// computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct GTable {
    pub s: Vec<f64>,
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
}

impl GTable {
    pub fn r(&self) -> usize {
        self.plus.len() - 1
    }

    pub fn n_agents(&self) -> usize {
        self.s.len()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("agent\td\tg_plus\tg_minus\n");
        for v in 0..self.n_agents() {
            for d in 0..=self.r() {
                writeln!(
                    out,
                    "{v}\t{d}\t{:?}\t{:?}",
                    self.plus[d][v], self.minus[d][v]
                )
                .unwrap();
            }
        }
        out
    }
}

/// The `g` recursion; per `d`, every `g⁺` before every `g⁻`.
pub fn compute_g(inst: &NormalizedInstance, s: &[f64], r: usize) -> Result<GTable> {
    let inst = inst.instance();
    let n = inst.n_agents();
    if s.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} s values for {n} agents",
            s.len()
        )));
    }
    let objective = |v: usize| {
        inst.agent_objectives(v)
            .next()
            .expect("normalized agent has an objective")
            .node
    };
    let mut plus: Vec<Vec<f64>> = Vec::with_capacity(r + 1);
    let mut minus: Vec<Vec<f64>> = Vec::with_capacity(r + 1);
    for d in 0..=r {
        let p: Vec<f64> = (0..n)
            .map(|v| {
                inst.agent_constraints(v)
                    .map(|e| {
                        let partner = if d == 0 {
                            None
                        } else {
                            inst.constraint_members(e.node)
                                .find(|m| m.agent != v)
                                .map(|m| (m.coef, minus[d - 1][m.agent]))
                        };
                        residual(e.coef, partner)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let m: Vec<f64> = (0..n)
            .map(|v| {
                let others = inst
                    .objective_members(objective(v))
                    .filter(|e| e.agent != v)
                    .map(|e| p[e.agent]);
                deficit(s[v], others)
            })
            .collect();
        plus.push(p);
        minus.push(m);
    }
    Ok(GTable {
        s: s.to_vec(),
        plus,
        minus,
    })
}

/// `x_v = Σ_d (g⁺_{v,d} + g⁻_{v,d}) / (2R)`.
pub fn output_x(g: &GTable, period: usize) -> Solution {
    let scale = 2.0 * period as f64;
    Solution::new(
        (0..g.n_agents())
            .map(|v| {
                (0..=g.r())
                    .map(|d| g.plus[d][v] + g.minus[d][v])
                    .fold(0.0, |a, x| a + x)
                    / scale
            })
            .collect(),
    )
}

/// Everything one run of the algorithm computed.
#[derive(Clone, Debug)]
pub struct LocalRun {
    pub t: Vec<f64>,
    pub g: GTable,
    pub x: Solution,
}

pub fn solve_local_detailed(inst: &NormalizedInstance, params: &Params) -> Result<LocalRun> {
    let r = params.r();
    let t = compute_all_t(inst, r, params.bisect_tol())?;
    let s = compute_s(inst, &t, r)?;
    let g = compute_g(inst, &s, r)?;
    let x = output_x(&g, params.period());
    Ok(LocalRun { t, g, x })
}

pub fn solve_local(inst: &NormalizedInstance, params: &Params) -> Result<Solution> {
    solve_local_detailed(inst, params).map(|run| run.x)
}

#[cfg(test)]
mod tests;
