use super::{Components, Edge, Instance, Solution};

/// What [`preprocess_degenerate`] removed or flagged. Indices refer to the
/// original instance.
#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyReport {
    /// Constraints left without agents.
    pub deleted_constraints: Vec<usize>,
    /// Objectives without agents; each forces the optimum to zero.
    pub zero_forcing_objectives: Vec<usize>,
    /// Agents without objectives; removed and fixed to zero.
    pub zeroed_agents: Vec<usize>,
    /// Agents with an objective but no constraint.
    pub unbounded_agents: Vec<usize>,
    /// Connected components of the original instance.
    pub components: Components,
    /// Original index of each agent of the reduced instance.
    pub kept_agents: Vec<usize>,
    pub kept_constraints: Vec<usize>,
    pub kept_objectives: Vec<usize>,
    pub original_agents: usize,
}

impl DegeneracyReport {
    pub fn is_clean(&self) -> bool {
        self.deleted_constraints.is_empty()
            && self.zero_forcing_objectives.is_empty()
            && self.zeroed_agents.is_empty()
            && self.unbounded_agents.is_empty()
    }

    pub fn optimum_forced_zero(&self) -> bool {
        !self.zero_forcing_objectives.is_empty()
    }

    /// Maps a solution of the reduced instance to the original agents;
    /// removed agents get zero.
    pub fn lift(&self, x: &Solution) -> Solution {
        let mut values = vec![0.0; self.original_agents];
        for (j, &v) in self.kept_agents.iter().enumerate() {
            values[v] = x.values[j];
        }
        Solution::new(values)
    }
}

/// Removes isolated constraints and objectives and agents without
/// objectives, and flags agents without constraints.
pub fn preprocess_degenerate(inst: &Instance) -> (Instance, DegeneracyReport) {
    let n = inst.n_agents();
    let zeroed_agents: Vec<usize> = (0..n)
        .filter(|&v| inst.agent_objectives(v).next().is_none())
        .collect();
    let unbounded_agents: Vec<usize> = (0..n)
        .filter(|&v| {
            inst.agent_objectives(v).next().is_some() && inst.agent_constraints(v).next().is_none()
        })
        .collect();
    let mut keep_agent = vec![true; n];
    for &v in &zeroed_agents {
        keep_agent[v] = false;
    }
    let deleted_constraints: Vec<usize> = (0..inst.n_constraints())
        .filter(|&i| inst.constraint_members(i).all(|e| !keep_agent[e.agent]))
        .collect();
    let zero_forcing_objectives: Vec<usize> = (0..inst.n_objectives())
        .filter(|&k| inst.objective_members(k).next().is_none())
        .collect();

    let kept_agents: Vec<usize> = (0..n).filter(|&v| keep_agent[v]).collect();
    let kept_constraints: Vec<usize> = (0..inst.n_constraints())
        .filter(|i| !deleted_constraints.contains(i))
        .collect();
    let kept_objectives: Vec<usize> = (0..inst.n_objectives())
        .filter(|k| !zero_forcing_objectives.contains(k))
        .collect();
    let index = |kept: &[usize], len: usize| {
        let mut map = vec![usize::MAX; len];
        for (j, &x) in kept.iter().enumerate() {
            map[x] = j;
        }
        map
    };
    let agent_map = index(&kept_agents, n);
    let constraint_map = index(&kept_constraints, inst.n_constraints());
    let objective_map = index(&kept_objectives, inst.n_objectives());

    let ce: Vec<Edge> = inst
        .constraint_edges()
        .iter()
        .filter(|e| keep_agent[e.agent])
        .map(|e| Edge {
            agent: agent_map[e.agent],
            node: constraint_map[e.node],
            ..e.clone()
        })
        .collect();
    let oe: Vec<Edge> = inst
        .objective_edges()
        .iter()
        .map(|e| Edge {
            agent: agent_map[e.agent],
            node: objective_map[e.node],
            ..e.clone()
        })
        .collect();
    let (ce, oe) = compact_ports(
        kept_agents.len(),
        kept_constraints.len(),
        kept_objectives.len(),
        ce,
        oe,
    );
    let reduced = Instance::new(
        kept_agents.len(),
        kept_constraints.len(),
        kept_objectives.len(),
        ce,
        oe,
    );
    let report = DegeneracyReport {
        deleted_constraints,
        zero_forcing_objectives,
        zeroed_agents,
        unbounded_agents,
        components: inst.components(),
        kept_agents,
        kept_constraints,
        kept_objectives,
        original_agents: n,
    };
    (reduced, report)
}

/// Renumbers ports at every node to `1..=degree`, keeping their order.
pub(crate) fn compact_ports(
    agents: usize,
    constraints: usize,
    objectives: usize,
    mut ce: Vec<Edge>,
    mut oe: Vec<Edge>,
) -> (Vec<Edge>, Vec<Edge>) {
    #[derive(Clone, Copy)]
    enum Slot {
        AgentC(usize),
        AgentO(usize),
    }
    let mut at_agent: Vec<Vec<(u32, Slot)>> = vec![Vec::new(); agents];
    let mut at_constraint: Vec<Vec<(u32, usize)>> = vec![Vec::new(); constraints];
    let mut at_objective: Vec<Vec<(u32, usize)>> = vec![Vec::new(); objectives];
    for (j, e) in ce.iter().enumerate() {
        at_agent[e.agent].push((e.agent_port, Slot::AgentC(j)));
        at_constraint[e.node].push((e.node_port, j));
    }
    for (j, e) in oe.iter().enumerate() {
        at_agent[e.agent].push((e.agent_port, Slot::AgentO(j)));
        at_objective[e.node].push((e.node_port, j));
    }
    for list in &mut at_agent {
        list.sort_by_key(|&(p, _)| p);
        for (n, &(_, slot)) in list.iter().enumerate() {
            let port = n as u32 + 1;
            match slot {
                Slot::AgentC(j) => ce[j].agent_port = port,
                Slot::AgentO(j) => oe[j].agent_port = port,
            }
        }
    }
    for (lists, edges) in [(&mut at_constraint, &mut ce), (&mut at_objective, &mut oe)] {
        for list in lists.iter_mut() {
            list.sort_by_key(|&(p, _)| p);
            for (n, &(_, j)) in list.iter().enumerate() {
                edges[j].node_port = n as u32 + 1;
            }
        }
    }
    (ce, oe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::e1;
    use crate::instance::validate;

    fn with_extra_nodes(extra_constraints: usize, extra_objectives: usize) -> Instance {
        let base = e1();
        Instance::new(
            2,
            1 + extra_constraints,
            1 + extra_objectives,
            base.constraint_edges().to_vec(),
            base.objective_edges().to_vec(),
        )
    }

    #[test]
    fn clean_instance_is_unchanged() {
        let (reduced, report) = preprocess_degenerate(&e1());
        assert_eq!(reduced, e1());
        assert!(report.is_clean());
        assert_eq!(report.components.count, 1);
    }

    #[test]
    fn isolated_constraint_is_deleted() {
        let (reduced, report) = preprocess_degenerate(&with_extra_nodes(1, 0));
        assert_eq!(reduced, e1());
        assert_eq!(report.deleted_constraints, vec![1]);
        assert!(!report.optimum_forced_zero());
    }

    #[test]
    fn isolated_objective_forces_zero() {
        let (reduced, report) = preprocess_degenerate(&with_extra_nodes(0, 1));
        assert_eq!(reduced, e1());
        assert_eq!(report.zero_forcing_objectives, vec![1]);
        assert!(report.optimum_forced_zero());
        assert_eq!(report.components.count, 2);
    }

    #[test]
    fn agent_without_objective_is_zeroed() {
        // v2 joins constraint i0 at port 3 but has no objective.
        let base = e1();
        let mut ce = base.constraint_edges().to_vec();
        ce.push(Edge::new(2, 0, 1.0, 1, 3));
        let inst = Instance::new(3, 1, 1, ce, base.objective_edges().to_vec());
        assert!(validate(&inst).is_empty());
        let (reduced, report) = preprocess_degenerate(&inst);
        assert_eq!(report.zeroed_agents, vec![2]);
        assert_eq!(reduced, e1());
        let lifted = report.lift(&Solution::new(vec![0.5, 0.25]));
        assert_eq!(lifted.values, vec![0.5, 0.25, 0.0]);
    }

    #[test]
    fn agent_without_constraint_is_unbounded() {
        let inst = Instance::new(1, 0, 1, vec![], vec![Edge::new(0, 0, 1.0, 1, 1)]);
        let (_, report) = preprocess_degenerate(&inst);
        assert_eq!(report.unbounded_agents, vec![0]);
        assert!(report.zeroed_agents.is_empty());
    }

    #[test]
    fn compact_ports_keeps_order() {
        let ce = vec![Edge::new(0, 0, 1.0, 5, 9), Edge::new(1, 0, 1.0, 2, 4)];
        let (ce, _) = compact_ports(2, 1, 0, ce, vec![]);
        assert_eq!((ce[0].agent_port, ce[0].node_port), (1, 2));
        assert_eq!((ce[1].agent_port, ce[1].node_port), (1, 1));
    }
}
