//! Layers, roles and the shifting strategy on finite tree instances.
//!
//! Only used to check the analysis; the algorithm's output does not depend
//! on anything here.

use std::collections::VecDeque;

use super::GTable;
use crate::error::{Error, Result};
use crate::instance::{EdgeKind, Instance, Node, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Up,
    Down,
}

/// Layer of every node and role of every agent.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerAssignment {
    pub agents: Vec<i64>,
    pub constraints: Vec<i64>,
    pub objectives: Vec<i64>,
    pub roles: Vec<Role>,
}

impl LayerAssignment {
    pub fn layer(&self, node: Node) -> i64 {
        match node {
            Node::Agent(v) => self.agents[v],
            Node::Constraint(i) => self.constraints[i],
            Node::Objective(k) => self.objectives[k],
        }
    }

    /// Layer difference `layer(node) - layer(agent)` along an edge leaving
    /// an agent with the given role.
    pub fn weight(role: Role, towards: EdgeKind) -> i64 {
        match (role, towards) {
            (Role::Up, EdgeKind::Constraint) => -1,
            (Role::Down, EdgeKind::Constraint) => 1,
            (Role::Up, EdgeKind::Objective) => 1,
            (Role::Down, EdgeKind::Objective) => -1,
        }
    }
}

/// Layers by summing edge weights from objective `root` at layer 0, whose
/// up-agent is `up`. An objective reached from a down-agent takes its
/// other agent with the smallest port as up-agent.
pub fn assign_layers(inst: &Instance, root: usize, up: usize) -> Result<LayerAssignment> {
    if !inst.is_forest() || !inst.is_connected() {
        return Err(Error::NotATree);
    }
    if root >= inst.n_objectives() || !inst.objective_members(root).any(|e| e.agent == up) {
        return Err(Error::InvalidArgument(format!(
            "v{up} is not adjacent to k{root}"
        )));
    }
    const UNSET: i64 = i64::MIN;
    let mut out = LayerAssignment {
        agents: vec![UNSET; inst.n_agents()],
        constraints: vec![UNSET; inst.n_constraints()],
        objectives: vec![UNSET; inst.n_objectives()],
        roles: vec![Role::Down; inst.n_agents()],
    };
    let mut queue = VecDeque::new();
    let place_objective =
        |out: &mut LayerAssignment, queue: &mut VecDeque<Node>, k: usize, layer: i64, up: usize| {
            out.objectives[k] = layer;
            for e in inst.objective_members(k) {
                let role = if e.agent == up { Role::Up } else { Role::Down };
                if out.agents[e.agent] == UNSET {
                    out.roles[e.agent] = role;
                    out.agents[e.agent] =
                        layer - LayerAssignment::weight(role, EdgeKind::Objective);
                    queue.push_back(Node::Agent(e.agent));
                }
            }
        };
    place_objective(&mut out, &mut queue, root, 0, up);
    while let Some(x) = queue.pop_front() {
        let Node::Agent(v) = x else { unreachable!() };
        let (role, layer) = (out.roles[v], out.agents[v]);
        for e in inst.agent_constraints(v) {
            let i = e.node;
            if out.constraints[i] != UNSET {
                continue;
            }
            let li = layer + LayerAssignment::weight(role, EdgeKind::Constraint);
            out.constraints[i] = li;
            let other = if role == Role::Up {
                Role::Down
            } else {
                Role::Up
            };
            for m in inst.constraint_members(i).filter(|m| m.agent != v) {
                out.roles[m.agent] = other;
                out.agents[m.agent] = li - LayerAssignment::weight(other, EdgeKind::Constraint);
                queue.push_back(Node::Agent(m.agent));
            }
        }
        for e in inst.agent_objectives(v) {
            let k = e.node;
            if out.objectives[k] != UNSET {
                continue;
            }
            let lk = layer + LayerAssignment::weight(role, EdgeKind::Objective);
            let up_agent = match role {
                Role::Up => v,
                Role::Down => match inst.objective_members(k).find(|m| m.agent != v) {
                    Some(m) => m.agent,
                    None => v,
                },
            };
            place_objective(&mut out, &mut queue, k, lk, up_agent);
        }
    }
    Ok(out)
}

/// `y(j)`: agents on passive layers get 0, the others their `g` value of
/// the matching depth, `g⁻` for up-agents and `g⁺` for down-agents.
pub fn shift_solution(
    g: &GTable,
    layers: &LayerAssignment,
    j: usize,
    period: usize,
) -> Result<Solution> {
    if j >= period {
        return Err(Error::InvalidArgument(format!(
            "shift {j} is not below R = {period}"
        )));
    }
    if layers.agents.len() != g.n_agents() {
        return Err(Error::DimensionMismatch(
            "layers and g-table cover different agents".into(),
        ));
    }
    let r = period - 2;
    let values = (0..g.n_agents())
        .map(|v| {
            let e = match layers.roles[v] {
                Role::Up => -1,
                Role::Down => 1,
            };
            let d = ((layers.agents[v] - e) / 4 - j as i64).rem_euclid(period as i64) as usize;
            if d == period - 1 {
                0.0
            } else if e == -1 {
                g.minus[r - d][v]
            } else {
                g.plus[r - d][v]
            }
        })
        .collect();
    Ok(Solution::new(values))
}

/// The average of `y(j)` over all shifts in closed form:
/// `(1/R) Σ_d g⁻_{v,d}` for up-agents and `(1/R) Σ_d g⁺_{v,d}` for
/// down-agents.
pub fn averaged_shift(g: &GTable, layers: &LayerAssignment, period: usize) -> Solution {
    Solution::new(
        (0..g.n_agents())
            .map(|v| {
                let table = if layers.roles[v] == Role::Up {
                    &g.minus
                } else {
                    &g.plus
                };
                table.iter().map(|row| row[v]).sum::<f64>() / period as f64
            })
            .collect(),
    )
}
