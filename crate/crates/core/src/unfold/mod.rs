//! Truncated unfoldings (trees of non-backtracking walks), their comparison
//! under port numbering, and alternating trees.

mod alternating;
mod signature;

use std::fmt::Write as _;

pub use alternating::{
    alternating_tree, alternating_tree_to_instance, build_alternating_tree, AlternatingTree,
    TreeInstance, TreeNode,
};
pub use signature::ViewSigner;

use crate::error::{Error, Result};
use crate::instance::{compact_ports, Edge, EdgeId, Instance, Node, NodeKind};

/// One non-backtracking walk. The walk ends at `node`; its last edge is
/// `via`, whose coefficient and endpoint ports are copied here.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkNode {
    pub node: Node,
    pub parent: Option<usize>,
    pub via: Option<EdgeId>,
    /// Coefficient of `via`; 0 at the root.
    pub coef: f64,
    /// Port of `via` at the parent walk-node.
    pub port_at_parent: u32,
    /// Port of `via` at this walk-node.
    pub port_at_node: u32,
    pub depth: usize,
    /// Ordered by `port_at_parent`.
    pub children: Vec<usize>,
}

/// All non-backtracking walks from a root of length at most `depth`.
/// Index 0 is the root; nodes are stored in breadth-first order.
#[derive(Clone, Debug)]
pub struct LocalView {
    nodes: Vec<WalkNode>,
    depth: usize,
}

impl LocalView {
    pub fn root(&self) -> Node {
        self.nodes[0].node
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[WalkNode] {
        &self.nodes
    }

    pub fn node(&self, w: usize) -> &WalkNode {
        &self.nodes[w]
    }

    /// Indented text, one walk-node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![0usize];
        while let Some(w) = stack.pop() {
            let n = &self.nodes[w];
            let parent = n.parent.map_or("-".to_string(), |p| p.to_string());
            writeln!(
                out,
                "{:indent$}#{w} depth {} parent {parent} {} {} ports {}/{} coef {:?}",
                "",
                n.depth,
                n.node.kind(),
                n.node,
                n.port_at_parent,
                n.port_at_node,
                n.coef,
                indent = 2 * n.depth
            )
            .unwrap();
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// The view as a finite instance. Returns the instance and, for every
    /// agent, constraint and objective of it, the walk-node it came from.
    pub fn to_instance(&self) -> (Instance, [Vec<usize>; 3]) {
        arena_to_instance(self.nodes.iter().map(|n| ArenaItem {
            kind: n.node.kind(),
            parent: n.parent,
            coef: n.coef,
            port_at_parent: n.port_at_parent,
            port_at_node: n.port_at_node,
        }))
    }
}

pub(crate) struct ArenaItem {
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub coef: f64,
    pub port_at_parent: u32,
    pub port_at_node: u32,
}

/// Turns a rooted tree, given parent-first, into an instance with one node
/// per tree node and compacted ports. Also returns the tree index of every
/// agent, constraint and objective.
pub(crate) fn arena_to_instance(
    items: impl Iterator<Item = ArenaItem>,
) -> (Instance, [Vec<usize>; 3]) {
    let items: Vec<ArenaItem> = items.collect();
    let mut index = vec![0usize; items.len()];
    let mut origin: [Vec<usize>; 3] = Default::default();
    for (w, n) in items.iter().enumerate() {
        let class = kind_slot(n.kind);
        index[w] = origin[class].len();
        origin[class].push(w);
    }
    let mut ce = Vec::new();
    let mut oe = Vec::new();
    for (w, n) in items.iter().enumerate() {
        let Some(p) = n.parent else { continue };
        let (agent, other, agent_port, other_port) = if n.kind == NodeKind::Agent {
            (w, p, n.port_at_node, n.port_at_parent)
        } else {
            (p, w, n.port_at_parent, n.port_at_node)
        };
        let edge = Edge::new(index[agent], index[other], n.coef, agent_port, other_port);
        match items[other].kind {
            NodeKind::Constraint => ce.push(edge),
            _ => oe.push(edge),
        }
    }
    let [a, c, o] = [origin[0].len(), origin[1].len(), origin[2].len()];
    let (ce, oe) = compact_ports(a, c, o, ce, oe);
    (Instance::new(a, c, o, ce, oe), origin)
}

fn kind_slot(kind: NodeKind) -> usize {
    match kind {
        NodeKind::Agent => 0,
        NodeKind::Constraint => 1,
        NodeKind::Objective => 2,
    }
}

pub(crate) fn node_in_range(inst: &Instance, node: Node) -> bool {
    match node {
        Node::Agent(v) => v < inst.n_agents(),
        Node::Constraint(i) => i < inst.n_constraints(),
        Node::Objective(k) => k < inst.n_objectives(),
    }
}

/// Builds the view level by level.
pub fn unfold_to_depth(inst: &Instance, root: Node, depth: usize) -> Result<LocalView> {
    if !node_in_range(inst, root) {
        return Err(Error::InvalidArgument(format!(
            "root {root} is not in the instance"
        )));
    }
    let mut nodes = vec![WalkNode {
        node: root,
        parent: None,
        via: None,
        coef: 0.0,
        port_at_parent: 0,
        port_at_node: 0,
        depth: 0,
        children: Vec::new(),
    }];
    let mut frontier = vec![0usize];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &w in &frontier {
            let (here, via) = (nodes[w].node, nodes[w].via);
            for &e in inst.incident(here) {
                if Some(e) == via {
                    continue;
                }
                let there = inst.opposite(e, here);
                let child = nodes.len();
                nodes.push(WalkNode {
                    node: there,
                    parent: Some(w),
                    via: Some(e),
                    coef: inst.edge(e).coef,
                    port_at_parent: inst.port_at(e, here),
                    port_at_node: inst.port_at(e, there),
                    depth: d,
                    children: Vec::new(),
                });
                nodes[w].children.push(child);
                next.push(child);
            }
        }
        frontier = next;
    }
    Ok(LocalView { nodes, depth })
}

/// Root-preserving isomorphism matching node kinds, coefficients bit for
/// bit and both ports of every edge. Views of different depth never match.
pub fn view_isomorphic(a: &LocalView, b: &LocalView) -> bool {
    if a.depth != b.depth {
        return false;
    }
    let mut stack = vec![(0usize, 0usize)];
    while let Some((x, y)) = stack.pop() {
        let (p, q) = (&a.nodes[x], &b.nodes[y]);
        if p.node.kind() != q.node.kind() || p.children.len() != q.children.len() {
            return false;
        }
        for (&cx, &cy) in p.children.iter().zip(&q.children) {
            let (c, d) = (&a.nodes[cx], &b.nodes[cy]);
            if c.port_at_parent != d.port_at_parent
                || c.port_at_node != d.port_at_node
                || c.coef.to_bits() != d.coef.to_bits()
            {
                return false;
            }
            stack.push((cx, cy));
        }
    }
    true
}
