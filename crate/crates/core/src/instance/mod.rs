//! Max-min LP instances on port-numbered bipartite communication graphs.
//!
//! An instance has three node classes: agents (one variable each),
//! constraints (rows of `A`) and objectives (rows of `C`). Every edge joins
//! an agent to a constraint or an objective and carries a positive
//! coefficient plus a port number at each endpoint. Node identifiers are
//! dense per class and their order is the declaration order.

mod generate;
mod preprocess;
mod text;

use std::fmt;

pub use generate::{generate_random, GeneratorKind};
pub(crate) use preprocess::compact_ports;
pub use preprocess::{preprocess_degenerate, DegeneracyReport};
pub use text::{
    parse_instance, parse_solution, serialize_instance, serialize_solution, ParsedSolution,
};

use crate::error::{Error, Result};

/// Default slack for feasibility checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Agent(usize),
    Constraint(usize),
    Objective(usize),
}

impl Node {
    pub fn kind(self) -> NodeKind {
        match self {
            Node::Agent(_) => NodeKind::Agent,
            Node::Constraint(_) => NodeKind::Constraint,
            Node::Objective(_) => NodeKind::Objective,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Node::Agent(i) | Node::Constraint(i) | Node::Objective(i) => i,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Agent(i) => write!(f, "v{i}"),
            Node::Constraint(i) => write!(f, "i{i}"),
            Node::Objective(i) => write!(f, "k{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Agent,
    Constraint,
    Objective,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Agent => "agent",
            NodeKind::Constraint => "constraint",
            NodeKind::Objective => "objective",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Constraint,
    Objective,
}

/// Index of an edge within its class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub kind: EdgeKind,
    pub index: usize,
}

impl EdgeId {
    pub fn constraint(index: usize) -> Self {
        EdgeId {
            kind: EdgeKind::Constraint,
            index,
        }
    }

    pub fn objective(index: usize) -> Self {
        EdgeId {
            kind: EdgeKind::Objective,
            index,
        }
    }
}

/// An agent–constraint or agent–objective edge. `node` indexes the
/// constraint or objective depending on which list the edge lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub agent: usize,
    pub node: usize,
    pub coef: f64,
    pub agent_port: u32,
    pub node_port: u32,
}

impl Edge {
    pub fn new(agent: usize, node: usize, coef: f64, agent_port: u32, node_port: u32) -> Self {
        Edge {
            agent,
            node,
            coef,
            agent_port,
            node_port,
        }
    }
}

/// A single invariant breach found by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UnknownEndpoint {
        edge: EdgeId,
    },
    NonPositiveCoefficient {
        edge: EdgeId,
        coef: f64,
    },
    ParallelEdge {
        edge: EdgeId,
        first: EdgeId,
    },
    DuplicatePort {
        node: Node,
        port: u32,
    },
    PortOutOfRange {
        node: Node,
        port: u32,
        degree: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEndpoint { edge } => {
                write!(f, "edge {edge:?} references an unknown node")
            }
            Violation::NonPositiveCoefficient { edge, coef } => {
                write!(f, "nonpositive coefficient {coef} on edge {edge:?}")
            }
            Violation::ParallelEdge { edge, first } => {
                write!(f, "edge {edge:?} is parallel to {first:?}")
            }
            Violation::DuplicatePort { node, port } => write!(f, "duplicate port {port} at {node}"),
            Violation::PortOutOfRange { node, port, degree } => {
                write!(f, "port {port} at {node} outside 1..={degree}")
            }
        }
    }
}

/// A max-min LP instance. Construction never fails; call [`validate`] (or
/// [`Instance::checked`]) to learn whether the invariants hold.
#[derive(Clone, Debug)]
pub struct Instance {
    agents: usize,
    constraints: usize,
    objectives: usize,
    constraint_edges: Vec<Edge>,
    objective_edges: Vec<Edge>,
    agent_adj: Vec<Vec<EdgeId>>,
    constraint_adj: Vec<Vec<EdgeId>>,
    objective_adj: Vec<Vec<EdgeId>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.agents == other.agents
            && self.constraints == other.constraints
            && self.objectives == other.objectives
            && self.constraint_edges == other.constraint_edges
            && self.objective_edges == other.objective_edges
    }
}

impl Instance {
    pub fn new(
        agents: usize,
        constraints: usize,
        objectives: usize,
        constraint_edges: Vec<Edge>,
        objective_edges: Vec<Edge>,
    ) -> Self {
        let mut agent_adj = vec![Vec::new(); agents];
        let mut constraint_adj = vec![Vec::new(); constraints];
        let mut objective_adj = vec![Vec::new(); objectives];
        for (index, e) in constraint_edges.iter().enumerate() {
            if e.agent < agents && e.node < constraints {
                agent_adj[e.agent].push(EdgeId::constraint(index));
                constraint_adj[e.node].push(EdgeId::constraint(index));
            }
        }
        for (index, e) in objective_edges.iter().enumerate() {
            if e.agent < agents && e.node < objectives {
                agent_adj[e.agent].push(EdgeId::objective(index));
                objective_adj[e.node].push(EdgeId::objective(index));
            }
        }
        let mut inst = Instance {
            agents,
            constraints,
            objectives,
            constraint_edges,
            objective_edges,
            agent_adj,
            constraint_adj,
            objective_adj,
        };
        let mut agent_adj = std::mem::take(&mut inst.agent_adj);
        for list in &mut agent_adj {
            list.sort_by_key(|&id| (inst.edge(id).agent_port, id));
        }
        inst.agent_adj = agent_adj;
        let mut constraint_adj = std::mem::take(&mut inst.constraint_adj);
        for list in &mut constraint_adj {
            list.sort_by_key(|&id| (inst.edge(id).node_port, id));
        }
        inst.constraint_adj = constraint_adj;
        let mut objective_adj = std::mem::take(&mut inst.objective_adj);
        for list in &mut objective_adj {
            list.sort_by_key(|&id| (inst.edge(id).node_port, id));
        }
        inst.objective_adj = objective_adj;
        inst
    }

    /// Builds an instance and rejects it unless every invariant holds.
    pub fn checked(
        agents: usize,
        constraints: usize,
        objectives: usize,
        constraint_edges: Vec<Edge>,
        objective_edges: Vec<Edge>,
    ) -> Result<Self> {
        let inst = Self::new(
            agents,
            constraints,
            objectives,
            constraint_edges,
            objective_edges,
        );
        inst.ensure_valid()?;
        Ok(inst)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = validate(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    pub fn n_agents(&self) -> usize {
        self.agents
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints
    }

    pub fn n_objectives(&self) -> usize {
        self.objectives
    }

    pub fn n_nodes(&self) -> usize {
        self.agents + self.constraints + self.objectives
    }

    pub fn constraint_edges(&self) -> &[Edge] {
        &self.constraint_edges
    }

    pub fn objective_edges(&self) -> &[Edge] {
        &self.objective_edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        match id.kind {
            EdgeKind::Constraint => &self.constraint_edges[id.index],
            EdgeKind::Objective => &self.objective_edges[id.index],
        }
    }

    /// Edges incident to `node`, ordered by the port number at `node`.
    pub fn incident(&self, node: Node) -> &[EdgeId] {
        match node {
            Node::Agent(v) => &self.agent_adj[v],
            Node::Constraint(i) => &self.constraint_adj[i],
            Node::Objective(k) => &self.objective_adj[k],
        }
    }

    pub fn degree(&self, node: Node) -> usize {
        self.incident(node).len()
    }

    /// The endpoint of `edge` that is not `from`.
    pub fn opposite(&self, edge: EdgeId, from: Node) -> Node {
        let e = self.edge(edge);
        match from {
            Node::Agent(_) => match edge.kind {
                EdgeKind::Constraint => Node::Constraint(e.node),
                EdgeKind::Objective => Node::Objective(e.node),
            },
            _ => Node::Agent(e.agent),
        }
    }

    pub fn port_at(&self, edge: EdgeId, node: Node) -> u32 {
        let e = self.edge(edge);
        match node {
            Node::Agent(_) => e.agent_port,
            _ => e.node_port,
        }
    }

    /// Constraint edges at agent `v`, in port order.
    pub fn agent_constraints(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.agent_adj[v]
            .iter()
            .filter(|id| id.kind == EdgeKind::Constraint)
            .map(move |&id| self.edge(id))
    }

    /// Objective edges at agent `v`, in port order.
    pub fn agent_objectives(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.agent_adj[v]
            .iter()
            .filter(|id| id.kind == EdgeKind::Objective)
            .map(move |&id| self.edge(id))
    }

    /// Edges of constraint `i`, in port order.
    pub fn constraint_members(&self, i: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.constraint_adj[i].iter().map(move |&id| self.edge(id))
    }

    /// Edges of objective `k`, in port order.
    pub fn objective_members(&self, k: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.objective_adj[k].iter().map(move |&id| self.edge(id))
    }

    /// `min_{i in I_v} 1 / a_iv`, or `+inf` when `v` has no constraint.
    pub fn capacity(&self, v: usize) -> f64 {
        self.agent_constraints(v)
            .map(|e| 1.0 / e.coef)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest constraint size `max |V_i|` (0 without constraints).
    pub fn delta_i(&self) -> usize {
        self.constraint_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest objective size `max |V_k|` (0 without objectives).
    pub fn delta_k(&self) -> usize {
        self.objective_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Connected-component label of every node, numbered in order of first
    /// appearance scanning agents, then constraints, then objectives.
    pub fn components(&self) -> Components {
        let offsets = [0, self.agents, self.agents + self.constraints];
        let flat = |n: Node| match n {
            Node::Agent(i) => offsets[0] + i,
            Node::Constraint(i) => offsets[1] + i,
            Node::Objective(i) => offsets[2] + i,
        };
        let mut label = vec![usize::MAX; self.n_nodes()];
        let mut count = 0;
        let all = (0..self.agents)
            .map(Node::Agent)
            .chain((0..self.constraints).map(Node::Constraint))
            .chain((0..self.objectives).map(Node::Objective));
        for start in all {
            if label[flat(start)] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[flat(start)] = count;
            while let Some(x) = stack.pop() {
                for &e in self.incident(x) {
                    let y = self.opposite(e, x);
                    if label[flat(y)] == usize::MAX {
                        label[flat(y)] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        let agents = label[..self.agents].to_vec();
        let constraints = label[self.agents..self.agents + self.constraints].to_vec();
        let objectives = label[self.agents + self.constraints..].to_vec();
        Components {
            count,
            agents,
            constraints,
            objectives,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.components().count <= 1
    }

    /// Whether the communication graph is a forest.
    pub fn is_forest(&self) -> bool {
        let edges = self.constraint_edges.len() + self.objective_edges.len();
        edges + self.components().count == self.n_nodes()
    }

    /// Breadth-first distances (in edges) from `root` to every node,
    /// returned per class; unreachable nodes get `usize::MAX`.
    pub fn distances(&self, root: Node) -> Distances {
        let mut d = Distances {
            agents: vec![usize::MAX; self.agents],
            constraints: vec![usize::MAX; self.constraints],
            objectives: vec![usize::MAX; self.objectives],
        };
        let mut queue = std::collections::VecDeque::new();
        d.set(root, 0);
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            let dx = d.get(x);
            for &e in self.incident(x) {
                let y = self.opposite(e, x);
                if d.get(y) == usize::MAX {
                    d.set(y, dx + 1);
                    queue.push_back(y);
                }
            }
        }
        d
    }

    /// The same instance with one edge's coefficient replaced.
    pub fn with_coefficient(&self, edge: EdgeId, coef: f64) -> Instance {
        let mut ce = self.constraint_edges.clone();
        let mut oe = self.objective_edges.clone();
        match edge.kind {
            EdgeKind::Constraint => ce[edge.index].coef = coef,
            EdgeKind::Objective => oe[edge.index].coef = coef,
        }
        Instance::new(self.agents, self.constraints, self.objectives, ce, oe)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    pub agents: Vec<usize>,
    pub constraints: Vec<usize>,
    pub objectives: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Distances {
    pub agents: Vec<usize>,
    pub constraints: Vec<usize>,
    pub objectives: Vec<usize>,
}

impl Distances {
    pub fn get(&self, n: Node) -> usize {
        match n {
            Node::Agent(i) => self.agents[i],
            Node::Constraint(i) => self.constraints[i],
            Node::Objective(i) => self.objectives[i],
        }
    }

    fn set(&mut self, n: Node, value: usize) {
        match n {
            Node::Agent(i) => self.agents[i] = value,
            Node::Constraint(i) => self.constraints[i] = value,
            Node::Objective(i) => self.objectives[i] = value,
        }
    }
}

/// Every invariant violation of `inst`; empty iff the instance is valid.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashMap::new();
    let lists = [
        (
            EdgeKind::Constraint,
            &inst.constraint_edges,
            inst.constraints,
        ),
        (EdgeKind::Objective, &inst.objective_edges, inst.objectives),
    ];
    for (kind, edges, nodes) in lists {
        for (index, e) in edges.iter().enumerate() {
            let id = EdgeId { kind, index };
            if e.agent >= inst.agents || e.node >= nodes {
                out.push(Violation::UnknownEndpoint { edge: id });
                continue;
            }
            if e.coef.is_nan() || e.coef <= 0.0 || !e.coef.is_finite() {
                out.push(Violation::NonPositiveCoefficient {
                    edge: id,
                    coef: e.coef,
                });
            }
            if let Some(&first) = seen.get(&(kind, e.agent, e.node)) {
                out.push(Violation::ParallelEdge { edge: id, first });
            } else {
                seen.insert((kind, e.agent, e.node), id);
            }
        }
    }
    let nodes = (0..inst.agents)
        .map(Node::Agent)
        .chain((0..inst.constraints).map(Node::Constraint))
        .chain((0..inst.objectives).map(Node::Objective));
    for node in nodes {
        let ids = inst.incident(node);
        let degree = ids.len();
        let mut count = vec![0usize; degree + 1];
        for &id in ids {
            let port = inst.port_at(id, node);
            if port == 0 || port as usize > degree {
                out.push(Violation::PortOutOfRange { node, port, degree });
            } else {
                count[port as usize] += 1;
                if count[port as usize] == 2 {
                    out.push(Violation::DuplicatePort { node, port });
                }
            }
        }
    }
    out
}

/// Nonnegative value per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
}

impl Solution {
    pub fn new(values: Vec<f64>) -> Self {
        Solution { values }
    }

    pub fn zeros(agents: usize) -> Self {
        Solution {
            values: vec![0.0; agents],
        }
    }

    /// Assembles a solution from `(agent, value)` pairs; every agent in
    /// `0..agents` must appear exactly once.
    pub fn from_pairs(agents: usize, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut values = vec![None; agents];
        for &(v, x) in pairs {
            if v >= agents {
                return Err(Error::InvalidArgument(format!(
                    "value for unknown agent v{v}"
                )));
            }
            if values[v].replace(x).is_some() {
                return Err(Error::InvalidArgument(format!("two values for agent v{v}")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(agent, x)| x.ok_or(Error::MissingValue { agent }))
            .collect::<Result<_>>()?;
        Ok(Solution { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }
}

fn ensure_covers(inst: &Instance, x: &Solution) -> Result<()> {
    if x.values.len() < inst.n_agents() {
        return Err(Error::MissingValue {
            agent: x.values.len(),
        });
    }
    Ok(())
}

/// `Σ_{v∈V_k} c_kv x_v`, summed in port order at `k`.
pub fn objective_value(inst: &Instance, k: usize, x: &Solution) -> f64 {
    inst.objective_members(k)
        .map(|e| e.coef * x.values[e.agent])
        .sum()
}

/// `Σ_{v∈V_i} a_iv x_v`, summed in port order at `i`.
pub fn constraint_load(inst: &Instance, i: usize, x: &Solution) -> f64 {
    inst.constraint_members(i)
        .map(|e| e.coef * x.values[e.agent])
        .sum()
}

/// `ω(x) = min_k Σ c_kv x_v`; `+inf` when there are no objectives.
pub fn utility(inst: &Instance, x: &Solution) -> Result<f64> {
    ensure_covers(inst, x)?;
    Ok((0..inst.n_objectives())
        .map(|k| objective_value(inst, k, x))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub violated_constraints: Vec<usize>,
    pub negative_agents: Vec<usize>,
}

/// Checks `Σ a_iv x_v ≤ 1 + tol` for every constraint and `x_v ≥ −tol`.
pub fn check_feasible(inst: &Instance, x: &Solution, tol: f64) -> Result<Feasibility> {
    ensure_covers(inst, x)?;
    let violated_constraints: Vec<usize> = (0..inst.n_constraints())
        .filter(|&i| {
            constraint_load(inst, i, x).is_nan() || constraint_load(inst, i, x) > 1.0 + tol
        })
        .collect();
    let negative_agents: Vec<usize> = (0..inst.n_agents())
        .filter(|&v| x.values[v].is_nan() || x.values[v] < -tol)
        .collect();
    Ok(Feasibility {
        feasible: violated_constraints.is_empty() && negative_agents.is_empty(),
        violated_constraints,
        negative_agents,
    })
}

/// Small hand-built instances shared by tests and documentation.
pub mod fixtures {
    use super::{Edge, Instance};

    /// The symmetric 4-cycle: agents v0, v1; constraint i0 and objective k0
    /// over both agents, all coefficients 1. Each agent has the constraint
    /// at port 1 and the objective at port 2.
    pub fn e1() -> Instance {
        cycle_pair(1.0, 1.0, 1.0, 1.0)
    }

    /// Like [`e1`] but with constraint coefficients (1, 2).
    pub fn e2() -> Instance {
        cycle_pair(1.0, 2.0, 1.0, 1.0)
    }

    /// Two agents sharing one constraint `a0 x0 + a1 x1 ≤ 1` and one
    /// objective `c0 x0 + c1 x1`.
    pub fn cycle_pair(a0: f64, a1: f64, c0: f64, c1: f64) -> Instance {
        Instance::new(
            2,
            1,
            1,
            vec![Edge::new(0, 0, a0, 1, 1), Edge::new(1, 0, a1, 1, 2)],
            vec![Edge::new(0, 0, c0, 2, 1), Edge::new(1, 0, c1, 2, 2)],
        )
    }

    /// One agent with constraint `a x ≤ 1` and objective `c x`.
    pub fn single(a: f64, c: f64) -> Instance {
        Instance::new(
            1,
            1,
            1,
            vec![Edge::new(0, 0, a, 1, 1)],
            vec![Edge::new(0, 0, c, 2, 1)],
        )
    }

    /// A tree: constraint i0 = {v0, v1}; objectives k0 = {v0, v2} and
    /// k1 = {v1, v3}; leaf constraints i1 = {v2}, i2 = {v3}.
    pub fn e1_tree() -> Instance {
        Instance::new(
            4,
            3,
            2,
            vec![
                Edge::new(0, 0, 1.0, 1, 1),
                Edge::new(1, 0, 1.0, 1, 2),
                Edge::new(2, 1, 1.0, 1, 1),
                Edge::new(3, 2, 1.0, 1, 1),
            ],
            vec![
                Edge::new(0, 0, 1.0, 2, 1),
                Edge::new(2, 0, 1.0, 2, 2),
                Edge::new(1, 1, 1.0, 2, 1),
                Edge::new(3, 1, 1.0, 2, 2),
            ],
        )
    }

    /// The double cover of the 4-cycle: agents v0..v3 around an 8-cycle
    /// v0-i0-v1-k0-v2-i1-v3-k1-v0, with ports chosen so that the rotation
    /// v0→v2, v1→v3 is a port-preserving automorphism.
    pub fn e1_double_cover() -> Instance {
        Instance::new(
            4,
            2,
            2,
            vec![
                Edge::new(0, 0, 1.0, 1, 1),
                Edge::new(1, 0, 1.0, 1, 2),
                Edge::new(2, 1, 1.0, 1, 1),
                Edge::new(3, 1, 1.0, 1, 2),
            ],
            vec![
                Edge::new(1, 0, 1.0, 2, 1),
                Edge::new(2, 0, 1.0, 2, 2),
                Edge::new(3, 1, 1.0, 2, 1),
                Edge::new(0, 1, 1.0, 2, 2),
            ],
        )
    }

    /// The quotient of [`e1_double_cover`]: E1 with the objective ports
    /// swapped (k0 sees v1 at port 1 and v0 at port 2).
    pub fn e1_twisted() -> Instance {
        Instance::new(
            2,
            1,
            1,
            vec![Edge::new(0, 0, 1.0, 1, 1), Edge::new(1, 0, 1.0, 1, 2)],
            vec![Edge::new(1, 0, 1.0, 2, 1), Edge::new(0, 0, 1.0, 2, 2)],
        )
    }
}
