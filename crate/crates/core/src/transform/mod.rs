//! Local transformations that bring an instance into normalized shape:
//! `|V_i| = 2`, `|V_k| ≥ 2`, `|K_v| = 1`, `|I_v| ≥ 1` and `c_kv = 1`.
//!
//! Every step returns the new instance, a [`BackStep`] that maps solutions
//! back, and the [`Origins`] of the new nodes. Ports of copied nodes are
//! renumbered by sorting on (old port, copy order).

mod backmap;

pub use backmap::{parse_backmap, serialize_backmap, BackMap, BackStep};

use crate::error::{Error, Result};
use crate::instance::{Edge, Instance, Node};

/// For every node of a transformed instance, the node of the input
/// instance it was derived from. Gadget nodes added for a singleton
/// constraint point at that constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Origins {
    pub agents: Vec<Node>,
    pub constraints: Vec<Node>,
    pub objectives: Vec<Node>,
}

impl Origins {
    fn identity(inst: &Instance) -> Self {
        Origins {
            agents: (0..inst.n_agents()).map(Node::Agent).collect(),
            constraints: (0..inst.n_constraints()).map(Node::Constraint).collect(),
            objectives: (0..inst.n_objectives()).map(Node::Objective).collect(),
        }
    }

    pub fn get(&self, node: Node) -> Node {
        match node {
            Node::Agent(v) => self.agents[v],
            Node::Constraint(i) => self.constraints[i],
            Node::Objective(k) => self.objectives[k],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub instance: Instance,
    pub back: BackStep,
    pub origins: Origins,
    /// Whether the instance changed.
    pub acted: bool,
}

/// One transform step.
pub type Transform = fn(&Instance) -> Step;

/// Edge whose final ports are the ranks of its sort keys at each endpoint.
struct KeyedEdge {
    edge: Edge,
    agent_key: (u32, u32),
    node_key: (u32, u32),
}

fn assemble(
    agents: usize,
    constraints: usize,
    objectives: usize,
    ce: Vec<KeyedEdge>,
    oe: Vec<KeyedEdge>,
) -> Instance {
    let mut ce = ce;
    let mut oe = oe;
    // (port key, is constraint edge, edge index) per agent.
    type Slot = ((u32, u32), bool, usize);
    let mut at_agent: Vec<Vec<Slot>> = vec![Vec::new(); agents];
    for (j, e) in ce.iter().enumerate() {
        at_agent[e.edge.agent].push((e.agent_key, true, j));
    }
    for (j, e) in oe.iter().enumerate() {
        at_agent[e.edge.agent].push((e.agent_key, false, j));
    }
    for list in &mut at_agent {
        list.sort_by_key(|&(key, _, _)| key);
        for (p, &(_, is_c, j)) in list.iter().enumerate() {
            let port = p as u32 + 1;
            if is_c {
                ce[j].edge.agent_port = port;
            } else {
                oe[j].edge.agent_port = port;
            }
        }
    }
    for (edges, count) in [(&mut ce, constraints), (&mut oe, objectives)] {
        let mut at_node: Vec<Vec<((u32, u32), usize)>> = vec![Vec::new(); count];
        for (j, e) in edges.iter().enumerate() {
            at_node[e.edge.node].push((e.node_key, j));
        }
        for list in &mut at_node {
            list.sort_by_key(|&(key, _)| key);
            for (p, &(_, j)) in list.iter().enumerate() {
                edges[j].edge.node_port = p as u32 + 1;
            }
        }
    }
    let ce = ce.into_iter().map(|e| e.edge).collect();
    let oe = oe.into_iter().map(|e| e.edge).collect();
    Instance::new(agents, constraints, objectives, ce, oe)
}

/// Refuses instances with empty constraints, objectives or agent
/// neighborhoods.
pub fn ensure_nondegenerate(inst: &Instance) -> Result<()> {
    inst.ensure_valid()?;
    for i in 0..inst.n_constraints() {
        if inst.constraint_members(i).next().is_none() {
            return Err(Error::Degenerate(format!("constraint i{i} has no agent")));
        }
    }
    for k in 0..inst.n_objectives() {
        if inst.objective_members(k).next().is_none() {
            return Err(Error::Degenerate(format!("objective k{k} has no agent")));
        }
    }
    for v in 0..inst.n_agents() {
        if inst.agent_objectives(v).next().is_none() {
            return Err(Error::Degenerate(format!("agent v{v} has no objective")));
        }
        if inst.agent_constraints(v).next().is_none() {
            return Err(Error::Unbounded { agents: vec![v] });
        }
    }
    Ok(())
}

/// Gives every singleton constraint a second agent through a gadget that
/// leaves the optimum unchanged.
pub fn t1_augment_singleton_constraints(inst: &Instance) -> Step {
    let n = inst.n_agents();
    let mut ce = inst.constraint_edges().to_vec();
    let mut oe = inst.objective_edges().to_vec();
    let mut origins = Origins::identity(inst);
    let (mut agents, mut constraints, mut objectives) =
        (n, inst.n_constraints(), inst.n_objectives());
    for i in 0..inst.n_constraints() {
        let members: Vec<&Edge> = inst.constraint_members(i).collect();
        if members.len() != 1 {
            continue;
        }
        let v = members[0].agent;
        let k = inst
            .agent_objectives(v)
            .next()
            .expect("agent has an objective")
            .node;
        let weight: f64 = inst
            .objective_members(k)
            .map(|e| e.coef * inst.capacity(e.agent))
            .sum();
        let big = 2.0 * weight;
        let (s, t, u) = (agents, agents + 1, agents + 2);
        let (h, l) = (objectives, objectives + 1);
        let j = constraints;
        agents += 3;
        objectives += 2;
        constraints += 1;
        ce.push(Edge::new(s, i, 1.0, 1, 2));
        ce.push(Edge::new(t, j, 1.0, 2, 1));
        ce.push(Edge::new(u, j, 1.0, 2, 2));
        oe.push(Edge::new(s, h, 1.0, 2, 1));
        oe.push(Edge::new(s, l, 1.0, 3, 1));
        oe.push(Edge::new(t, h, big, 1, 2));
        oe.push(Edge::new(u, l, big, 1, 2));
        let anchor = Node::Constraint(i);
        origins.agents.extend([anchor; 3]);
        origins.objectives.extend([anchor; 2]);
        origins.constraints.push(anchor);
    }
    let acted = agents > n;
    Step {
        instance: Instance::new(agents, constraints, objectives, ce, oe),
        back: BackStep::Truncate {
            from: agents,
            keep: n,
        },
        origins,
        acted,
    }
}

/// Replaces every constraint over more than two agents by the pairwise
/// constraints of its members.
pub fn t2_reduce_constraint_degree(inst: &Instance) -> Step {
    let max_degree: Vec<usize> = (0..inst.n_agents())
        .map(|v| {
            inst.agent_constraints(v)
                .map(|e| inst.degree(Node::Constraint(e.node)))
                .max()
                .unwrap_or(2)
                .max(2)
        })
        .collect();
    let mut ce = Vec::new();
    let mut origins = Origins::identity(inst);
    origins.constraints.clear();
    let mut next = 0;
    for i in 0..inst.n_constraints() {
        let members: Vec<&Edge> = inst.constraint_members(i).collect();
        if members.len() <= 2 {
            for e in members {
                ce.push(KeyedEdge {
                    edge: Edge {
                        node: next,
                        ..e.clone()
                    },
                    agent_key: (e.agent_port, 0),
                    node_key: (e.node_port, 0),
                });
            }
            origins.constraints.push(Node::Constraint(i));
            next += 1;
            continue;
        }
        let mut q = 0;
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                for e in [members[a], members[b]] {
                    ce.push(KeyedEdge {
                        edge: Edge {
                            node: next,
                            ..e.clone()
                        },
                        agent_key: (e.agent_port, q),
                        node_key: (e.node_port, 0),
                    });
                }
                origins.constraints.push(Node::Constraint(i));
                next += 1;
                q += 1;
            }
        }
    }
    let oe = keep_objective_edges(inst);
    let acted = next != inst.n_constraints();
    Step {
        instance: assemble(inst.n_agents(), next, inst.n_objectives(), ce, oe),
        back: BackStep::Degree { max_degree },
        origins,
        acted,
    }
}

fn keep_objective_edges(inst: &Instance) -> Vec<KeyedEdge> {
    inst.objective_edges()
        .iter()
        .map(|e| KeyedEdge {
            edge: e.clone(),
            agent_key: (e.agent_port, 0),
            node_key: (e.node_port, 0),
        })
        .collect()
}

/// How to split agents: `copies[v][j]` lists the objective edges of copy
/// `j` of agent `v` with their new coefficients.
struct SplitPlan {
    copies: Vec<Vec<Vec<(usize, f64)>>>,
}

/// Copy 0 of every agent and constraint keeps its index; further copies
/// are appended. Constraint copies range over all combinations of member
/// copies, in lexicographic order over members in port order.
fn split_agents(inst: &Instance, plan: &SplitPlan) -> Step {
    let n = inst.n_agents();
    let mut agent_id: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut agents = n;
    let mut origin_agents: Vec<Node> = (0..n).map(Node::Agent).collect();
    for v in 0..n {
        let mut ids = vec![v];
        for _ in 1..plan.copies[v].len() {
            ids.push(agents);
            origin_agents.push(Node::Agent(v));
            agents += 1;
        }
        agent_id.push(ids);
    }
    let mut oe = Vec::new();
    for (v, ids) in agent_id.iter().enumerate() {
        for (j, list) in plan.copies[v].iter().enumerate() {
            for &(idx, coef) in list {
                let e = &inst.objective_edges()[idx];
                oe.push(KeyedEdge {
                    edge: Edge {
                        agent: ids[j],
                        coef,
                        ..e.clone()
                    },
                    agent_key: (e.agent_port, 0),
                    node_key: (e.node_port, j as u32),
                });
            }
        }
    }
    let mut ce = Vec::new();
    let mut constraints = inst.n_constraints();
    let mut origin_constraints: Vec<Node> = (0..constraints).map(Node::Constraint).collect();
    for i in 0..inst.n_constraints() {
        let members: Vec<&Edge> = inst.constraint_members(i).collect();
        let counts: Vec<usize> = members.iter().map(|e| plan.copies[e.agent].len()).collect();
        let mut tuple = vec![0usize; members.len()];
        let mut q = 0u32;
        loop {
            let id = if q == 0 {
                i
            } else {
                origin_constraints.push(Node::Constraint(i));
                constraints += 1;
                constraints - 1
            };
            for (t, e) in members.iter().enumerate() {
                ce.push(KeyedEdge {
                    edge: Edge {
                        agent: agent_id[e.agent][tuple[t]],
                        node: id,
                        ..(*e).clone()
                    },
                    agent_key: (e.agent_port, q),
                    node_key: (e.node_port, 0),
                });
            }
            q += 1;
            // Odometer step, last member fastest.
            let mut t = members.len();
            loop {
                if t == 0 {
                    break;
                }
                t -= 1;
                tuple[t] += 1;
                if tuple[t] < counts[t] {
                    break;
                }
                tuple[t] = 0;
            }
            if tuple.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    let acted = agents > n;
    let groups = agent_id.clone();
    Step {
        instance: assemble(agents, constraints, inst.n_objectives(), ce, oe),
        back: BackStep::MaxOfCopies {
            from: agents,
            groups,
        },
        origins: Origins {
            agents: origin_agents,
            constraints: origin_constraints,
            objectives: (0..inst.n_objectives()).map(Node::Objective).collect(),
        },
        acted,
    }
}

fn objective_edge_index(inst: &Instance, v: usize) -> Vec<usize> {
    inst.incident(Node::Agent(v))
        .iter()
        .filter(|id| id.kind == crate::instance::EdgeKind::Objective)
        .map(|id| id.index)
        .collect()
}

/// Splits every agent with several objectives into one copy per
/// objective, ordered by port at the agent.
pub fn t3_unique_objective_per_agent(inst: &Instance) -> Step {
    let copies = (0..inst.n_agents())
        .map(|v| {
            let objs = objective_edge_index(inst, v);
            if objs.len() <= 1 {
                vec![objs
                    .iter()
                    .map(|&j| (j, inst.objective_edges()[j].coef))
                    .collect()]
            } else {
                objs.iter()
                    .map(|&j| vec![(j, inst.objective_edges()[j].coef)])
                    .collect()
            }
        })
        .collect();
    split_agents(inst, &SplitPlan { copies })
}

/// Splits the agent of every singleton objective into two copies that
/// share the objective coefficient equally.
pub fn t4_augment_singleton_objectives(inst: &Instance) -> Step {
    let copies = (0..inst.n_agents())
        .map(|v| {
            let objs = objective_edge_index(inst, v);
            let single = objs.len() == 1
                && inst.degree(Node::Objective(inst.objective_edges()[objs[0]].node)) == 1;
            if single {
                let half = inst.objective_edges()[objs[0]].coef / 2.0;
                vec![vec![(objs[0], half)], vec![(objs[0], half)]]
            } else {
                vec![objs
                    .iter()
                    .map(|&j| (j, inst.objective_edges()[j].coef))
                    .collect()]
            }
        })
        .collect();
    split_agents(inst, &SplitPlan { copies })
}

/// Divides every coefficient at agent `v` by `c_{k(v)v}`. Requires
/// `|K_v| = 1`.
pub fn t5_normalize_objective_coefficients(inst: &Instance) -> Step {
    let scale: Vec<f64> = (0..inst.n_agents())
        .map(|v| inst.agent_objectives(v).next().map_or(1.0, |e| e.coef))
        .collect();
    let ce: Vec<Edge> = inst
        .constraint_edges()
        .iter()
        .map(|e| Edge {
            coef: e.coef / scale[e.agent],
            ..e.clone()
        })
        .collect();
    let oe: Vec<Edge> = inst
        .objective_edges()
        .iter()
        .map(|e| Edge {
            coef: e.coef / scale[e.agent],
            ..e.clone()
        })
        .collect();
    let acted = scale.iter().any(|&c| c != 1.0);
    Step {
        instance: Instance::new(
            inst.n_agents(),
            inst.n_constraints(),
            inst.n_objectives(),
            ce,
            oe,
        ),
        back: BackStep::Divide { coef: scale },
        origins: Origins::identity(inst),
        acted,
    }
}

/// An instance certified to have the normalized shape. A relaxed
/// certificate also admits single-agent constraints, as in finite trees.
#[derive(Clone, Debug)]
pub struct NormalizedInstance {
    instance: Instance,
    relaxed: bool,
}

impl NormalizedInstance {
    pub fn certify(inst: Instance) -> Result<Self> {
        Self::check(&inst, false)?;
        Ok(NormalizedInstance {
            instance: inst,
            relaxed: false,
        })
    }

    pub fn certify_relaxed(inst: Instance) -> Result<Self> {
        Self::check(&inst, true)?;
        let relaxed = (0..inst.n_constraints()).any(|i| inst.degree(Node::Constraint(i)) == 1);
        Ok(NormalizedInstance {
            instance: inst,
            relaxed,
        })
    }

    fn check(inst: &Instance, relaxed: bool) -> Result<()> {
        inst.ensure_valid()?;
        let low = if relaxed { 1 } else { 2 };
        for i in 0..inst.n_constraints() {
            let d = inst.degree(Node::Constraint(i));
            if d < low || d > 2 {
                return Err(Error::NotNormalized(format!(
                    "constraint i{i} has {d} agents"
                )));
            }
        }
        for k in 0..inst.n_objectives() {
            let d = inst.degree(Node::Objective(k));
            if d < 2 {
                return Err(Error::NotNormalized(format!(
                    "objective k{k} has {d} agents"
                )));
            }
        }
        for v in 0..inst.n_agents() {
            let objectives = inst.agent_objectives(v).count();
            if objectives != 1 {
                return Err(Error::NotNormalized(format!(
                    "agent v{v} has {objectives} objectives"
                )));
            }
            if inst.agent_constraints(v).next().is_none() {
                return Err(Error::NotNormalized(format!(
                    "agent v{v} has no constraint"
                )));
            }
        }
        if let Some(e) = inst.objective_edges().iter().find(|e| e.coef != 1.0) {
            return Err(Error::NotNormalized(format!(
                "objective coefficient {:?} between v{} and k{}",
                e.coef, e.agent, e.node
            )));
        }
        Ok(())
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn into_instance(self) -> Instance {
        self.instance
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }
}

/// Output of [`normalize`]: the certified instance, the composed back-map,
/// and for every final node the input node it descends from.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub instance: NormalizedInstance,
    pub backmap: BackMap,
    pub origins: Origins,
}

/// Applies the five transformations in order.
pub fn normalize(inst: &Instance) -> Result<Normalized> {
    ensure_nondegenerate(inst)?;
    let mut current = inst.clone();
    let mut steps = Vec::new();
    let mut origins = Origins::identity(inst);
    let mut multiplier = 1.0;
    let transforms: [(&str, Transform); 5] = [
        ("t1", t1_augment_singleton_constraints),
        ("t2", t2_reduce_constraint_degree),
        ("t3", t3_unique_objective_per_agent),
        ("t4", t4_augment_singleton_objectives),
        ("t5", t5_normalize_objective_coefficients),
    ];
    for (name, f) in transforms {
        let step = f(&current);
        if name == "t2" && step.acted {
            multiplier = current.delta_i() as f64 / 2.0;
        }
        origins = Origins {
            agents: step
                .origins
                .agents
                .iter()
                .map(|&n| origins.get(n))
                .collect(),
            constraints: step
                .origins
                .constraints
                .iter()
                .map(|&n| origins.get(n))
                .collect(),
            objectives: step
                .origins
                .objectives
                .iter()
                .map(|&n| origins.get(n))
                .collect(),
        };
        steps.push(step.back);
        current = step.instance;
    }
    let instance = NormalizedInstance::certify(current)?;
    Ok(Normalized {
        instance,
        backmap: BackMap::new(steps, multiplier),
        origins,
    })
}
