//! Locality of the algorithm and of the normalization, plus covering
//! instances that share every local view with their base.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algo::{solve_local, Params};
use crate::error::{Error, Result};
use crate::instance::{Edge, Instance, Node, NodeKind, Solution};
use crate::transform::{normalize, NormalizedInstance};
use crate::unfold::{unfold_to_depth, ViewSigner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locality {
    /// The views differ, so nothing is claimed.
    NotApplicable,
    /// The views agree and so do the outputs, bit for bit.
    Identical,
    /// The views agree but the outputs do not.
    Differs,
}

impl Locality {
    pub fn holds(self) -> bool {
        self != Locality::Differs
    }
}

/// Compares the outputs at `va` and `vb` when their views of depth
/// `params.horizon()` agree.
pub fn check_locality(
    a: &NormalizedInstance,
    b: &NormalizedInstance,
    va: usize,
    vb: usize,
    params: &Params,
) -> Result<Locality> {
    let mut signer = ViewSigner::new();
    if !same_view(
        &mut signer,
        a.instance(),
        b.instance(),
        va,
        vb,
        params.horizon(),
    )? {
        return Ok(Locality::NotApplicable);
    }
    let xa = solve_local(a, params)?;
    let xb = solve_local(b, params)?;
    Ok(compare_outputs(&xa, &xb, va, vb))
}

/// [`check_locality`] with the outputs already computed.
pub fn check_locality_with(
    signer: &mut ViewSigner,
    (a, xa, va): (&Instance, &Solution, usize),
    (b, xb, vb): (&Instance, &Solution, usize),
    depth: usize,
) -> Result<Locality> {
    if !same_view(signer, a, b, va, vb, depth)? {
        return Ok(Locality::NotApplicable);
    }
    Ok(compare_outputs(xa, xb, va, vb))
}

fn same_view(
    signer: &mut ViewSigner,
    a: &Instance,
    b: &Instance,
    va: usize,
    vb: usize,
    depth: usize,
) -> Result<bool> {
    if va >= a.n_agents() || vb >= b.n_agents() {
        return Err(Error::InvalidArgument(format!(
            "agent v{va} or v{vb} out of range"
        )));
    }
    Ok(signer.signature(a, Node::Agent(va), depth) == signer.signature(b, Node::Agent(vb), depth))
}

fn compare_outputs(xa: &Solution, xb: &Solution, va: usize, vb: usize) -> Locality {
    if xa.get(va).to_bits() == xb.get(vb).to_bits() {
        Locality::Identical
    } else {
        Locality::Differs
    }
}

/// An `m`-fold covering instance with random voltages. Every node `x` has
/// copies `(x, 0..m)` at index `j · n_x + x`; the edge between copy `j` of
/// its agent and its other endpoint goes to copy `j + σ_e mod m`. Ports and
/// coefficients are those of the base, so every copy of an agent has the
/// same views as the agent itself. Also returns the base agent of every
/// agent copy.
pub fn random_cover(inst: &Instance, m: usize, seed: u64) -> Result<(Instance, Vec<usize>)> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "a cover needs at least one copy".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (na, nc, no) = (inst.n_agents(), inst.n_constraints(), inst.n_objectives());
    let mut lift = |edges: &[Edge], nodes: usize| -> Vec<Edge> {
        let shifts: Vec<usize> = edges.iter().map(|_| rng.gen_range(0..m)).collect();
        (0..m)
            .flat_map(|j| {
                edges.iter().zip(&shifts).map(move |(e, &s)| {
                    Edge::new(
                        j * na + e.agent,
                        ((j + s) % m) * nodes + e.node,
                        e.coef,
                        e.agent_port,
                        e.node_port,
                    )
                })
            })
            .collect()
    };
    let ce = lift(inst.constraint_edges(), nc);
    let oe = lift(inst.objective_edges(), no);
    let cover = Instance::new(m * na, m * nc, m * no, ce, oe);
    Ok((cover, (0..m * na).map(|v| v % na).collect()))
}

/// Result of comparing a normalized view with the normalized instance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Consistency {
    /// Interior walk-nodes compared.
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl Consistency {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Normalizes the depth-`view_depth` view of agent `root` as an instance
/// on its own and compares it with the normalization of the whole
/// instance. For every walk-node at depth at most `check_depth`, the nodes
/// derived from it must match the nodes derived from its base node, as a
/// multiset of (kind, signature of depth `sig_depth`).
///
/// `view_depth` must be odd so the view ends in constraints and
/// objectives and stays non-degenerate.
pub fn normalization_consistency(
    inst: &Instance,
    root: usize,
    view_depth: usize,
    check_depth: usize,
    sig_depth: usize,
) -> Result<Consistency> {
    if view_depth.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "view depth {view_depth} must be odd"
        )));
    }
    let full = normalize(inst)?;
    let view = unfold_to_depth(inst, Node::Agent(root), view_depth)?;
    let (local, walk_of) = view.to_instance();
    let part = normalize(&local)?;
    let mut signer = ViewSigner::new();

    type Bag = HashMap<(NodeKind, u32), usize>;
    let collect = |signer: &mut ViewSigner,
                   target: &Instance,
                   origins: &crate::transform::Origins,
                   key: &dyn Fn(Node) -> Option<usize>| {
        let mut bags: HashMap<usize, Bag> = HashMap::new();
        let nodes = (0..target.n_agents())
            .map(Node::Agent)
            .chain((0..target.n_constraints()).map(Node::Constraint))
            .chain((0..target.n_objectives()).map(Node::Objective));
        for x in nodes {
            if let Some(k) = key(origins.get(x)) {
                let sig = signer.signature(target, x, sig_depth);
                *bags
                    .entry(k)
                    .or_default()
                    .entry((x.kind(), sig))
                    .or_default() += 1;
            }
        }
        bags
    };

    let walk = |n: Node| -> usize {
        match n {
            Node::Agent(v) => walk_of[0][v],
            Node::Constraint(i) => walk_of[1][i],
            Node::Objective(k) => walk_of[2][k],
        }
    };
    let base_key = |n: Node| -> usize {
        match n {
            Node::Agent(v) => 3 * v,
            Node::Constraint(i) => 3 * i + 1,
            Node::Objective(k) => 3 * k + 2,
        }
    };
    let interior = |n: Node| Some(walk(n)).filter(|&w| view.node(w).depth <= check_depth);
    let local_bags = collect(
        &mut signer,
        part.instance.instance(),
        &part.origins,
        &interior,
    );
    let full_bags = collect(&mut signer, full.instance.instance(), &full.origins, &|n| {
        Some(base_key(n))
    });

    let mut out = Consistency::default();
    for (w, node) in view
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.depth <= check_depth)
    {
        out.checked += 1;
        let empty = Bag::new();
        let mine = local_bags.get(&w).unwrap_or(&empty);
        let theirs = full_bags.get(&base_key(node.node)).unwrap_or(&empty);
        if mine != theirs {
            out.mismatches.push(format!(
                "walk-node {w} ({} at depth {}): {} derived nodes locally, {} globally",
                node.node,
                node.depth,
                mine.values().sum::<usize>(),
                theirs.values().sum::<usize>()
            ));
        }
    }
    Ok(out)
}
