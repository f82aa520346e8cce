//! Alternating trees.
//!
//! Starting at agent `u`, the tree follows `u`'s constraints (level -2,
//! leaves) and its objective `k(u)` (level 0). Below `k(u)` walks alternate:
//! an objective leads to its other agents (down-agents), a down-agent to its
//! constraints, a constraint to its other agent (an up-agent), and an
//! up-agent to its objective. Constraints at level `4r+2` are leaves.

use std::fmt::Write as _;

use super::{arena_to_instance, node_in_range, ArenaItem, LocalView};
use crate::error::{Error, Result};
use crate::instance::{EdgeId, EdgeKind, Instance, Node, NodeKind};

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub node: Node,
    pub level: i64,
    pub parent: Option<usize>,
    pub via: Option<EdgeId>,
    pub coef: f64,
    pub port_at_parent: u32,
    pub port_at_node: u32,
    /// Ordered by `port_at_parent`.
    pub children: Vec<usize>,
}

/// Index 0 is the root agent `u`; parents precede children.
#[derive(Clone, Debug, PartialEq)]
pub struct AlternatingTree {
    nodes: Vec<TreeNode>,
    r: usize,
}

impl AlternatingTree {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn root_agent(&self) -> usize {
        self.nodes[0].node.index()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, w: usize) -> &TreeNode {
        &self.nodes[w]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_level(&self) -> i64 {
        4 * self.r as i64 + 2
    }

    /// Tree nodes at `level`, in storage order.
    pub fn level(&self, level: i64) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&w| self.nodes[w].level == level)
    }

    pub fn is_down_agent(&self, w: usize) -> bool {
        self.nodes[w].node.kind() == NodeKind::Agent && self.nodes[w].level.rem_euclid(4) == 1
    }

    pub fn is_up_agent(&self, w: usize) -> bool {
        self.nodes[w].node.kind() == NodeKind::Agent && self.nodes[w].level.rem_euclid(4) == 3
    }

    /// The recursion index `d` of an agent: down-agents at level
    /// `4(r-d)+1`, up-agents at level `4(r-d)-1`.
    pub fn recursion_depth(&self, w: usize) -> Option<usize> {
        let level = self.nodes[w].level;
        let r = self.r as i64;
        let d = if self.is_down_agent(w) {
            r - (level - 1) / 4
        } else if self.is_up_agent(w) {
            r - (level + 1) / 4
        } else {
            return None;
        };
        Some(d as usize)
    }

    /// Indented text, one tree node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((w, indent)) = stack.pop() {
            let n = &self.nodes[w];
            let parent = n.parent.map_or("-".to_string(), |p| p.to_string());
            writeln!(
                out,
                "{:indent$}#{w} level {} parent {parent} {} {} ports {}/{} coef {:?}",
                "",
                n.level,
                n.node.kind(),
                n.node,
                n.port_at_parent,
                n.port_at_node,
                n.coef,
                indent = 2 * indent
            )
            .unwrap();
            stack.extend(n.children.iter().rev().map(|&c| (c, indent + 1)));
        }
        out
    }
}

/// Which children the walk takes next, given the current node's kind and
/// level.
fn follows(kind: NodeKind, level: i64, child: NodeKind, max_level: i64) -> bool {
    if level == -1 {
        return true;
    }
    if level == -2 || level >= max_level {
        return false;
    }
    match (kind, level.rem_euclid(4)) {
        (NodeKind::Objective, _) => child == NodeKind::Agent,
        (NodeKind::Agent, 1) => child == NodeKind::Constraint,
        (NodeKind::Constraint, _) => child == NodeKind::Agent,
        (NodeKind::Agent, _) => child == NodeKind::Objective,
    }
}

fn child_level(level: i64, child: NodeKind) -> i64 {
    match (level, child) {
        (-1, NodeKind::Constraint) => -2,
        (-1, _) => 0,
        _ => level + 1,
    }
}

struct Candidate {
    node: Node,
    via: EdgeId,
    coef: f64,
    port_at_parent: u32,
    port_at_node: u32,
}

/// Shared construction. `expand(w, nodes)` lists every neighbor of tree
/// node `w` other than its parent, in port order at `w`; `complete(w)`
/// says whether that list is the node's full neighborhood.
fn build(
    root: Node,
    r: usize,
    mut expand: impl FnMut(usize, &[TreeNode]) -> Vec<Candidate>,
    complete: impl Fn(usize, &[TreeNode]) -> bool,
) -> Result<AlternatingTree> {
    let max_level = 4 * r as i64 + 2;
    let mut nodes = vec![TreeNode {
        node: root,
        level: -1,
        parent: None,
        via: None,
        coef: 0.0,
        port_at_parent: 0,
        port_at_node: 0,
        children: Vec::new(),
    }];
    let mut w = 0;
    while w < nodes.len() {
        let (kind, level) = (nodes[w].node.kind(), nodes[w].level);
        let candidates = expand(w, &nodes);
        if complete(w, &nodes) {
            let has_parent = usize::from(nodes[w].parent.is_some());
            let objectives = candidates
                .iter()
                .filter(|c| c.node.kind() == NodeKind::Objective)
                .count();
            let degree = candidates.len() + has_parent;
            match kind {
                NodeKind::Agent => {
                    let total = objectives
                        + usize::from(nodes[w].via.map(|e| e.kind) == Some(EdgeKind::Objective));
                    if total != 1 {
                        return Err(Error::NotNormalized(format!(
                            "agent {} has {total} objectives",
                            nodes[w].node
                        )));
                    }
                    if degree < 2 {
                        return Err(Error::NotNormalized(format!(
                            "agent {} has no constraint",
                            nodes[w].node
                        )));
                    }
                }
                NodeKind::Constraint if degree > 2 => {
                    return Err(Error::NotNormalized(format!(
                        "constraint {} has {degree} agents",
                        nodes[w].node
                    )));
                }
                NodeKind::Objective if degree < 2 => {
                    return Err(Error::NotNormalized(format!(
                        "objective {} has one agent",
                        nodes[w].node
                    )));
                }
                _ => {}
            }
        }
        for c in candidates {
            if !follows(kind, level, c.node.kind(), max_level) {
                continue;
            }
            if c.via.kind == EdgeKind::Objective && c.coef != 1.0 {
                return Err(Error::NotNormalized(format!(
                    "objective coefficient {:?} on edge {} - {}",
                    c.coef, nodes[w].node, c.node
                )));
            }
            let child = nodes.len();
            nodes.push(TreeNode {
                node: c.node,
                level: child_level(level, c.node.kind()),
                parent: Some(w),
                via: Some(c.via),
                coef: c.coef,
                port_at_parent: c.port_at_parent,
                port_at_node: c.port_at_node,
                children: Vec::new(),
            });
            nodes[w].children.push(child);
        }
        w += 1;
    }
    Ok(AlternatingTree { nodes, r })
}

/// `A_u` built directly on the instance.
pub fn alternating_tree(inst: &Instance, u: usize, r: usize) -> Result<AlternatingTree> {
    if !node_in_range(inst, Node::Agent(u)) {
        return Err(Error::InvalidArgument(format!(
            "agent v{u} is not in the instance"
        )));
    }
    let expand = |w: usize, nodes: &[TreeNode]| {
        let here = nodes[w].node;
        inst.incident(here)
            .iter()
            .filter(|&&e| Some(e) != nodes[w].via)
            .map(|&e| {
                let there = inst.opposite(e, here);
                Candidate {
                    node: there,
                    via: e,
                    coef: inst.edge(e).coef,
                    port_at_parent: inst.port_at(e, here),
                    port_at_node: inst.port_at(e, there),
                }
            })
            .collect()
    };
    build(Node::Agent(u), r, expand, |_, _| true)
}

/// `A_u` extracted from a view rooted at `u` of depth at least `4r+3`.
pub fn build_alternating_tree(view: &LocalView, u: usize, r: usize) -> Result<AlternatingTree> {
    if view.root() != Node::Agent(u) {
        return Err(Error::InvalidArgument(format!(
            "view is rooted at {}, not v{u}",
            view.root()
        )));
    }
    if view.depth() < 4 * r + 3 {
        return Err(Error::InvalidArgument(format!(
            "view depth {} is below 4r+3 = {}",
            view.depth(),
            4 * r + 3
        )));
    }
    // Tree node -> walk-node.
    let mut walk: Vec<usize> = vec![0];
    let expand = |w: usize, nodes: &[TreeNode]| {
        walk.truncate(nodes.len());
        while walk.len() < nodes.len() {
            let t = walk.len();
            let parent_walk = walk[nodes[t].parent.unwrap()];
            let child = view
                .node(parent_walk)
                .children
                .iter()
                .copied()
                .find(|&c| view.node(c).via == nodes[t].via);
            walk.push(child.expect("tree node comes from a view child"));
        }
        let here = walk[w];
        view.node(here)
            .children
            .iter()
            .map(|&c| {
                let n = view.node(c);
                Candidate {
                    node: n.node,
                    via: n.via.unwrap(),
                    coef: n.coef,
                    port_at_parent: n.port_at_parent,
                    port_at_node: n.port_at_node,
                }
            })
            .collect()
    };
    let depth = view.depth();
    build(Node::Agent(u), r, expand, |w, nodes| {
        let length = match nodes[w].level {
            -2 => 1,
            l => (l + 1) as usize,
        };
        length < depth
    })
}

/// The restriction of the instance to an alternating tree, with the tree
/// index of every agent, constraint and objective.
#[derive(Clone, Debug)]
pub struct TreeInstance {
    pub instance: Instance,
    pub agent_nodes: Vec<usize>,
    pub constraint_nodes: Vec<usize>,
    pub objective_nodes: Vec<usize>,
}

/// Leaf constraints keep only their in-tree agent.
pub fn alternating_tree_to_instance(tree: &AlternatingTree) -> TreeInstance {
    let (instance, [agent_nodes, constraint_nodes, objective_nodes]) =
        arena_to_instance(tree.nodes.iter().map(|n| ArenaItem {
            kind: n.node.kind(),
            parent: n.parent,
            coef: n.coef,
            port_at_parent: n.port_at_parent,
            port_at_node: n.port_at_node,
        }));
    TreeInstance {
        instance,
        agent_nodes,
        constraint_nodes,
        objective_nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{e1, e1_tree, e2};
    use crate::instance::{Edge, GeneratorKind};
    use crate::unfold::unfold_to_depth;

    fn summary(t: &AlternatingTree) -> Vec<(String, i64)> {
        t.nodes()
            .iter()
            .map(|n| (n.node.to_string(), n.level))
            .collect()
    }

    #[test]
    fn e1_r0_levels() {
        let t = alternating_tree(&e1(), 0, 0).unwrap();
        let mut got = summary(&t);
        got.sort_by_key(|&(_, l)| l);
        let expected = [("i0", -2), ("v0", -1), ("k0", 0), ("v1", 1), ("i0", 2)];
        assert_eq!(got, expected.map(|(n, l)| (n.to_string(), l)));
    }

    #[test]
    fn e1_r1_shape() {
        let t = alternating_tree(&e1(), 0, 1).unwrap();
        assert_eq!(t.max_level(), 6);
        for (w, n) in t.nodes().iter().enumerate() {
            let m = n.level.rem_euclid(4);
            match n.node.kind() {
                NodeKind::Objective => assert_eq!(m, 0),
                NodeKind::Agent => assert!(m == 1 || m == 3),
                NodeKind::Constraint => assert_eq!(m, 2),
            }
            if n.children.is_empty() {
                assert_eq!(n.node.kind(), NodeKind::Constraint);
                assert!(n.level == -2 || n.level == 6, "leaf at level {}", n.level);
            }
            if n.node.kind() == NodeKind::Agent {
                assert!(t.recursion_depth(w).unwrap() <= 1);
            }
        }
        assert_eq!(t.level(6).count(), 1);
        assert_eq!(t.recursion_depth(0), Some(1));
    }

    #[test]
    fn view_and_instance_builders_agree() {
        for seed in 0..10 {
            let inst = crate::instance::generate_random(12, 2, 3, seed, GeneratorKind::Normalized)
                .unwrap();
            for r in 0..3 {
                for u in 0..inst.n_agents() {
                    let view = unfold_to_depth(&inst, Node::Agent(u), 4 * r + 3).unwrap();
                    let a = build_alternating_tree(&view, u, r).unwrap();
                    let b = alternating_tree(&inst, u, r).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn shallow_view_is_rejected() {
        let view = unfold_to_depth(&e1(), Node::Agent(0), 6).unwrap();
        assert!(build_alternating_tree(&view, 0, 1).is_err());
        assert!(build_alternating_tree(&view, 1, 0).is_err());
    }

    #[test]
    fn unnormalized_instances_are_named() {
        // v0 in two objectives.
        let base = e1();
        let mut oe = base.objective_edges().to_vec();
        oe.push(Edge::new(0, 1, 1.0, 3, 1));
        oe.push(Edge::new(1, 1, 1.0, 3, 2));
        let inst = Instance::new(2, 1, 2, base.constraint_edges().to_vec(), oe);
        let err = alternating_tree(&inst, 0, 0).unwrap_err();
        assert!(err.to_string().contains("objectives"), "{err}");
        let scaled = e1().with_coefficient(EdgeId::objective(1), 2.0);
        assert!(alternating_tree(&scaled, 0, 0).is_err());
    }

    #[test]
    fn restriction_of_e1() {
        let t = alternating_tree(&e1(), 0, 0).unwrap();
        let ti = alternating_tree_to_instance(&t);
        let inst = &ti.instance;
        assert_eq!(
            (inst.n_agents(), inst.n_constraints(), inst.n_objectives()),
            (2, 2, 1)
        );
        assert!(crate::instance::validate(inst).is_empty());
        assert!((0..2).all(|i| inst.constraint_members(i).count() == 1));
        assert_eq!(t.node(ti.agent_nodes[0]).level, -1);
    }

    #[test]
    fn tree_instance_restricted_from_tree() {
        let t = alternating_tree(&e1_tree(), 2, 2).unwrap();
        let ti = alternating_tree_to_instance(&t);
        assert!(ti.instance.is_forest());
        let t2 = alternating_tree(&e2(), 1, 0).unwrap();
        assert_eq!(t2.len(), 5);
    }
}
