//! Checks of the analysis run against one algorithm run.
//!
//! Each check is named after the property it asserts; a failure carries the
//! first counterexample found.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::lp::solve_exact;
use super::report::FEASIBILITY_TOL;
use crate::algo::{
    assign_layers, averaged_shift, f_feasible, omega_max, shift_solution, solve_local_detailed,
    FTable, GTable, LayerAssignment, LocalRun, Params, Role,
};
use crate::error::{Error, Result};
use crate::instance::{
    check_feasible, objective_value, EdgeKind, Instance, Node, NodeKind, Solution,
};
use crate::transform::NormalizedInstance;
use crate::unfold::{alternating_tree, alternating_tree_to_instance, AlternatingTree};

/// Names of all checks, in the order they are reported.
pub const CHECKS: [&str; 13] = [
    "tree-shape",
    "bisection-monotone",
    "tree-upper-bound",
    "tree-optimum",
    "g-brackets-f",
    "g-root-bounds",
    "g-monotone",
    "g-nonnegative",
    "layers",
    "shift-feasible",
    "shift-average",
    "output-feasible",
    "output-objectives",
];

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skipped(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Pass => write!(f, "pass"),
            Outcome::Fail(why) => write!(f, "FAIL {why}"),
            Outcome::Skipped(why) => write!(f, "skipped {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaResult {
    pub name: &'static str,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSuite {
    pub results: Vec<LemmaResult>,
}

impl LemmaSuite {
    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaResult> {
        self.results
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Fail(_)))
    }

    pub fn get(&self, name: &str) -> Option<&Outcome> {
        self.results
            .iter()
            .find(|r| r.name == name)
            .map(|r| &r.outcome)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("check\toutcome\n");
        for r in &self.results {
            out.push_str(&format!("{}\t{}\n", r.name, r.outcome));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaOptions {
    /// Oracle checks are skipped for instances or trees with more agents.
    pub oracle_limit: usize,
    /// `ω` pairs per tree for the monotonicity check.
    pub monotone_samples: usize,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions {
            oracle_limit: 150,
            monotone_samples: 20,
        }
    }
}

/// Runs the algorithm and then every check.
pub fn run_lemma_suite(inst: &NormalizedInstance, params: &Params) -> Result<LemmaSuite> {
    let run = solve_local_detailed(inst, params)?;
    run_lemma_suite_on(inst, params, &run, &LemmaOptions::default())
}

/// Runs every check against a given run, which need not come from the
/// algorithm.
pub fn run_lemma_suite_on(
    inst: &NormalizedInstance,
    params: &Params,
    run: &LocalRun,
    opts: &LemmaOptions,
) -> Result<LemmaSuite> {
    let inst = inst.instance();
    let r = params.r();
    let n = inst.n_agents();
    if run.g.n_agents() != n || run.t.len() != n || run.x.len() != n || run.g.plus.len() != r + 1 {
        return Err(Error::DimensionMismatch(
            "run does not match the instance and parameters".into(),
        ));
    }
    let trees: Vec<AlternatingTree> = (0..n)
        .into_par_iter()
        .map(|u| alternating_tree(inst, u, r))
        .collect::<Result<_>>()?;
    let eps = 10.0 * params.bisect_tol() * n as f64;
    let ctx = Ctx {
        inst,
        params,
        run,
        trees: &trees,
        eps,
    };

    let oracle = ctx.oracle(opts.oracle_limit);
    let is_tree = inst.is_forest() && inst.is_connected() && n > 0;
    let layers = if is_tree {
        let first = inst
            .objective_members(0)
            .next()
            .map(|e| e.agent)
            .unwrap_or(0);
        Some(assign_layers(inst, 0, first)?)
    } else {
        None
    };
    let not_tree = || Outcome::Skipped("instance is not a tree".into());

    let results = vec![
        ("tree-shape", ctx.tree_shape()),
        (
            "bisection-monotone",
            ctx.bisection_monotone(opts.monotone_samples),
        ),
        ("tree-upper-bound", ctx.tree_upper_bound(&oracle)),
        ("tree-optimum", ctx.tree_optimum(&oracle)),
        ("g-brackets-f", ctx.g_brackets_f()),
        ("g-root-bounds", ctx.g_root_bounds()),
        ("g-monotone", g_monotone(&run.g)),
        ("g-nonnegative", g_nonnegative(&run.g)),
        (
            "layers",
            layers
                .as_ref()
                .map_or_else(not_tree, |l| check_layers(inst, l)),
        ),
        (
            "shift-feasible",
            layers
                .as_ref()
                .map_or_else(not_tree, |l| ctx.shift_feasible(l)),
        ),
        (
            "shift-average",
            layers
                .as_ref()
                .map_or_else(not_tree, |l| ctx.shift_average(l)),
        ),
        ("output-feasible", ctx.output_feasible()),
        ("output-objectives", ctx.output_objectives()),
    ];
    Ok(LemmaSuite {
        results: results
            .into_iter()
            .map(|(name, outcome)| LemmaResult { name, outcome })
            .collect(),
    })
}

fn outcome(failure: Option<String>) -> Outcome {
    failure.map_or(Outcome::Pass, Outcome::Fail)
}

fn capacity(inst: &Instance, v: usize) -> f64 {
    inst.agent_constraints(v)
        .map(|e| 1.0 / e.coef)
        .fold(f64::INFINITY, f64::min)
}

fn min_s(inst: &Instance, g: &GTable, k: usize) -> f64 {
    inst.objective_members(k)
        .map(|e| g.s[e.agent])
        .fold(f64::INFINITY, f64::min)
}

/// Exact optima of the instance and of every restriction to a tree.
struct Oracle {
    instance: Option<f64>,
    trees: Vec<Option<f64>>,
    skipped: usize,
}

struct Ctx<'a> {
    inst: &'a Instance,
    params: &'a Params,
    run: &'a LocalRun,
    trees: &'a [AlternatingTree],
    eps: f64,
}

impl Ctx<'_> {
    fn oracle(&self, limit: usize) -> Result<Oracle> {
        let instance = if self.inst.n_agents() <= limit {
            Some(solve_exact(self.inst)?.0)
        } else {
            None
        };
        let trees: Vec<Option<f64>> = self
            .trees
            .par_iter()
            .map(|t| {
                let restricted = alternating_tree_to_instance(t).instance;
                if restricted.n_agents() <= limit {
                    solve_exact(&restricted).map(|(w, _)| Some(w))
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
        let skipped = trees.iter().filter(|t| t.is_none()).count();
        Ok(Oracle {
            instance,
            trees,
            skipped,
        })
    }

    fn tree_shape(&self) -> Outcome {
        let r = self.params.r() as i64;
        outcome(
            self.trees
                .iter()
                .enumerate()
                .find_map(|(u, t)| tree_shape(self.inst, t, r).map(|m| format!("A_{u}: {m}"))),
        )
    }

    fn bisection_monotone(&self, samples: usize) -> Outcome {
        outcome(self.trees.par_iter().enumerate().find_map_first(|(u, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(u as u64);
            let top = 1.25 * omega_max(t).max(1e-9);
            (0..samples).find_map(|s| {
                let hi = if s == 0 {
                    self.run.t[u]
                } else {
                    rng.gen_range(0.0..top)
                };
                let lo = rng.gen_range(0.0..=hi);
                (f_feasible(t, hi) && !f_feasible(t, lo))
                    .then(|| format!("A_{u}: feasible at {hi:?} but not at {lo:?}"))
            })
        }))
    }

    fn tree_upper_bound(&self, oracle: &Result<Oracle>) -> Outcome {
        let oracle = match oracle {
            Ok(o) => o,
            Err(e) => return Outcome::Fail(format!("oracle error: {e}")),
        };
        let Some(opt) = oracle.instance else {
            return Outcome::Skipped("instance exceeds the oracle limit".into());
        };
        if oracle.skipped == oracle.trees.len() && !oracle.trees.is_empty() {
            return Outcome::Skipped("all trees exceed the oracle limit".into());
        }
        outcome(oracle.trees.iter().enumerate().find_map(|(u, t)| {
            t.filter(|&w| w < opt - 1e-7)
                .map(|w| format!("A_{u} optimum {w:?} below instance optimum {opt:?}"))
        }))
    }

    fn tree_optimum(&self, oracle: &Result<Oracle>) -> Outcome {
        let oracle = match oracle {
            Ok(o) => o,
            Err(e) => return Outcome::Fail(format!("oracle error: {e}")),
        };
        if oracle.skipped == oracle.trees.len() && !oracle.trees.is_empty() {
            return Outcome::Skipped("all trees exceed the oracle limit".into());
        }
        let slack = 2.0 * self.params.bisect_tol();
        outcome(oracle.trees.iter().enumerate().find_map(|(u, t)| {
            t.filter(|&w| (self.run.t[u] - w).abs() > slack).map(|w| {
                format!(
                    "t_{u} = {:?} but the optimum of A_{u} is {w:?}",
                    self.run.t[u]
                )
            })
        }))
    }

    /// `g⁻ ≤ f⁻` on up-agents and `f⁺ ≤ g⁺` on down-agents of every tree,
    /// with `f` evaluated at `t_u`. Both recursions use the same arithmetic,
    /// so this holds without slack.
    fn g_brackets_f(&self) -> Outcome {
        let g = &self.run.g;
        outcome(
            self.trees
                .par_iter()
                .enumerate()
                .find_map_first(|(u, tree)| {
                    let f = FTable::new(tree, self.run.t[u]);
                    (0..tree.len()).find_map(|w| {
                        let d = tree.recursion_depth(w)?;
                        let Node::Agent(v) = tree.node(w).node else {
                            return None;
                        };
                        if tree.is_down_agent(w) && f.plus[w] > g.plus[d][v] {
                            Some(format!(
                                "A_{u} node {w} (v{v}, d {d}): f⁺ {:?} > g⁺ {:?}",
                                f.plus[w], g.plus[d][v]
                            ))
                        } else if !tree.is_down_agent(w) && g.minus[d][v] > f.minus[w] {
                            Some(format!(
                                "A_{u} node {w} (v{v}, d {d}): g⁻ {:?} > f⁻ {:?}",
                                g.minus[d][v], f.minus[w]
                            ))
                        } else {
                            None
                        }
                    })
                }),
        )
    }

    fn g_root_bounds(&self) -> Outcome {
        let g = &self.run.g;
        let r = g.r();
        outcome((0..g.n_agents()).find_map(|v| {
            let cap = capacity(self.inst, v);
            if g.plus[r][v] < 0.0 {
                Some(format!("g⁺ of v{v} at d {r} is {:?}", g.plus[r][v]))
            } else if g.minus[r][v] > cap {
                Some(format!(
                    "g⁻ of v{v} at d {r} is {:?} above capacity {cap:?}",
                    g.minus[r][v]
                ))
            } else {
                None
            }
        }))
    }

    fn shift_feasible(&self, layers: &LayerAssignment) -> Outcome {
        let period = self.params.period();
        let ring = 4 * period as i64;
        for j in 0..period {
            let y = match shift_solution(&self.run.g, layers, j, period) {
                Ok(y) => y,
                Err(e) => return Outcome::Fail(e.to_string()),
            };
            if let Some(m) = feasibility_failure(self.inst, &y) {
                return Outcome::Fail(format!("y({j}): {m}"));
            }
            let passive = (4 * j as i64 - 4).rem_euclid(ring);
            for k in 0..self.inst.n_objectives() {
                let w = objective_value(self.inst, k, &y);
                if layers.objectives[k].rem_euclid(ring) == passive {
                    if w != 0.0 {
                        return Outcome::Fail(format!("y({j}): passive k{k} has value {w:?}"));
                    }
                } else if w < min_s(self.inst, &self.run.g, k) - self.eps {
                    return Outcome::Fail(format!(
                        "y({j}): active k{k} has value {w:?} below min s"
                    ));
                }
            }
        }
        Outcome::Pass
    }

    fn shift_average(&self, layers: &LayerAssignment) -> Outcome {
        let period = self.params.period();
        let avg = averaged_shift(&self.run.g, layers, period);
        let mut mean = vec![0.0; self.inst.n_agents()];
        for j in 0..period {
            let y = shift_solution(&self.run.g, layers, j, period).expect("shift in range");
            for (m, y) in mean.iter_mut().zip(&y.values) {
                *m += y / period as f64;
            }
        }
        if let Some(v) =
            (0..mean.len()).find(|&v| (mean[v] - avg.get(v)).abs() > 1e-12 * (1.0 + mean[v].abs()))
        {
            return Outcome::Fail(format!(
                "v{v}: mean of shifts {:?} but closed form {:?}",
                mean[v],
                avg.get(v)
            ));
        }
        let factor = 1.0 - 1.0 / period as f64;
        outcome((0..self.inst.n_objectives()).find_map(|k| {
            let w = objective_value(self.inst, k, &avg);
            let bound = factor * min_s(self.inst, &self.run.g, k);
            (w < bound - self.eps).then(|| format!("k{k}: averaged value {w:?} below {bound:?}"))
        }))
    }

    fn output_feasible(&self) -> Outcome {
        outcome(feasibility_failure(self.inst, &self.run.x))
    }

    fn output_objectives(&self) -> Outcome {
        let period = self.params.period() as f64;
        outcome((0..self.inst.n_objectives()).find_map(|k| {
            let size = self.inst.degree(Node::Objective(k)) as f64;
            let bound = 0.5
                * (1.0 - 1.0 / period)
                * (size / (size - 1.0))
                * min_s(self.inst, &self.run.g, k);
            let w = objective_value(self.inst, k, &self.run.x);
            (w < bound - self.eps).then(|| format!("k{k}: value {w:?} below {bound:?}"))
        }))
    }
}

fn feasibility_failure(inst: &Instance, x: &Solution) -> Option<String> {
    match check_feasible(inst, x, FEASIBILITY_TOL) {
        Ok(f) if f.feasible => None,
        Ok(f) => Some(format!(
            "violated constraints {:?}, negative agents {:?}",
            f.violated_constraints, f.negative_agents
        )),
        Err(e) => Some(e.to_string()),
    }
}

/// The structural properties of an alternating tree; `None` if all hold.
pub fn tree_shape(inst: &Instance, tree: &AlternatingTree, r: i64) -> Option<String> {
    let root = tree.node(0);
    if root.parent.is_some() || root.level != -1 || root.node.kind() != NodeKind::Agent {
        return Some("root is not an agent at level -1".into());
    }
    for w in 0..tree.len() {
        let n = tree.node(w);
        if let Some(p) = n.parent {
            if p >= w || !tree.node(p).children.contains(&w) {
                return Some(format!("node {w} is not a child of its parent {p}"));
            }
            if (n.level - tree.node(p).level).abs() != 1 {
                return Some(format!(
                    "node {w} at level {} under level {}",
                    n.level,
                    tree.node(p).level
                ));
            }
        } else if w != 0 {
            return Some(format!("node {w} has no parent"));
        }
        let residue = n.level.rem_euclid(4);
        let ok = match n.node.kind() {
            NodeKind::Objective => residue == 0,
            NodeKind::Agent => residue == 1 || residue == 3,
            NodeKind::Constraint => residue == 2,
        };
        if !ok {
            return Some(format!("{} at level {}", n.node, n.level));
        }
        let inst_degree = inst.degree(n.node);
        let tree_degree = n.children.len() + usize::from(n.parent.is_some());
        match n.node {
            Node::Constraint(i) if n.children.is_empty() => {
                if n.level != -2 && n.level != 4 * r + 2 && inst_degree != 1 {
                    return Some(format!("leaf i{i} at level {}", n.level));
                }
            }
            Node::Objective(k) => {
                if n.children.is_empty() {
                    return Some(format!("objective k{k} is a leaf"));
                }
                if tree_degree != inst_degree {
                    return Some(format!(
                        "objective k{k} carries {tree_degree} of {inst_degree} agents"
                    ));
                }
            }
            Node::Agent(v) if w > 0 => {
                let kinds: Vec<NodeKind> = n
                    .children
                    .iter()
                    .map(|&c| tree.node(c).node.kind())
                    .collect();
                if residue == 1 {
                    let constraints = inst.agent_constraints(v).count();
                    if kinds.len() != constraints
                        || kinds.iter().any(|&k| k != NodeKind::Constraint)
                    {
                        return Some(format!(
                            "down-agent node {w} (v{v}) does not branch to its constraints"
                        ));
                    }
                } else if kinds != [NodeKind::Objective] {
                    return Some(format!(
                        "up-agent node {w} (v{v}) does not continue to its objective"
                    ));
                }
            }
            _ => {}
        }
        if n.node.kind() == NodeKind::Agent
            && w > 0
            && tree.node(n.parent.unwrap()).level == 0
            && n.level != 1
        {
            return Some(format!(
                "agent node {w} of the root objective at level {}",
                n.level
            ));
        }
        if n.level > 4 * r + 2 {
            return Some(format!("node {w} beyond level {}", 4 * r + 2));
        }
    }
    None
}

fn g_monotone(g: &GTable) -> Outcome {
    outcome((1..=g.r()).find_map(|d| {
        (0..g.n_agents()).find_map(|v| {
            if g.minus[d - 1][v] > g.minus[d][v] {
                Some(format!(
                    "v{v}: g⁻ at d {} is {:?} > {:?} at d {d}",
                    d - 1,
                    g.minus[d - 1][v],
                    g.minus[d][v]
                ))
            } else if g.plus[d][v] > g.plus[d - 1][v] {
                Some(format!(
                    "v{v}: g⁺ at d {d} is {:?} > {:?} at d {}",
                    g.plus[d][v],
                    g.plus[d - 1][v],
                    d - 1
                ))
            } else {
                None
            }
        })
    }))
}

fn g_nonnegative(g: &GTable) -> Outcome {
    outcome((0..=g.r()).find_map(|d| {
        (0..g.n_agents()).find_map(|v| {
            (g.plus[d][v] < 0.0
                || g.minus[d][v] < 0.0
                || g.plus[d][v].is_nan()
                || g.minus[d][v].is_nan())
            .then(|| {
                format!(
                    "v{v} at d {d}: g⁺ {:?}, g⁻ {:?}",
                    g.plus[d][v], g.minus[d][v]
                )
            })
        })
    }))
}

fn check_layers(inst: &Instance, layers: &LayerAssignment) -> Outcome {
    for v in 0..inst.n_agents() {
        let want = if layers.roles[v] == Role::Up { 3 } else { 1 };
        if layers.agents[v].rem_euclid(4) != want {
            return Outcome::Fail(format!(
                "{:?}-agent v{v} at layer {}",
                layers.roles[v], layers.agents[v]
            ));
        }
        for e in inst.agent_constraints(v) {
            let diff = layers.constraints[e.node] - layers.agents[v];
            if diff != LayerAssignment::weight(layers.roles[v], EdgeKind::Constraint) {
                return Outcome::Fail(format!("edge v{v}-i{} has layer difference {diff}", e.node));
            }
        }
        for e in inst.agent_objectives(v) {
            let diff = layers.objectives[e.node] - layers.agents[v];
            if diff != LayerAssignment::weight(layers.roles[v], EdgeKind::Objective) {
                return Outcome::Fail(format!("edge v{v}-k{} has layer difference {diff}", e.node));
            }
        }
    }
    for i in 0..inst.n_constraints() {
        let up = inst
            .constraint_members(i)
            .filter(|e| layers.roles[e.agent] == Role::Up)
            .count();
        let size = inst.degree(Node::Constraint(i));
        if layers.constraints[i].rem_euclid(4) != 2 || up > 1 || size - up > 1 {
            return Outcome::Fail(format!(
                "constraint i{i} at layer {} with {up} up of {size}",
                layers.constraints[i]
            ));
        }
    }
    for k in 0..inst.n_objectives() {
        let up = inst
            .objective_members(k)
            .filter(|e| layers.roles[e.agent] == Role::Up)
            .count();
        if layers.objectives[k].rem_euclid(4) != 0 || up != 1 {
            return Outcome::Fail(format!(
                "objective k{k} at layer {} with {up} up-agents",
                layers.objectives[k]
            ));
        }
    }
    Outcome::Pass
}

/// Ways to break a run on purpose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Corruption {
    /// Pushes `g⁻` of the first agent at `d = r` below its value at `r-1`.
    TopMinus,
    /// Multiplies the output by the factor.
    ScaleOutput(f64),
}

pub fn corrupt_run(run: &LocalRun, how: Corruption) -> LocalRun {
    let mut run = run.clone();
    match how {
        Corruption::TopMinus => {
            let r = run.g.r();
            if let Some(col) = run
                .g
                .minus
                .get(r.saturating_sub(1))
                .and_then(|row| row.first().copied())
            {
                run.g.minus[r][0] = 0.5 * col - 0.5;
            }
        }
        Corruption::ScaleOutput(f) => run.x.values.iter_mut().for_each(|x| *x *= f),
    }
    run
}
