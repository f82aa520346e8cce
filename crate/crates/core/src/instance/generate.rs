//! Seeded random instance families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Instance};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Arbitrary connected instance with `|V_i| ≤ ΔI`, `|V_k| ≤ ΔK`.
    General,
    /// `|V_i| = 2`, `|V_k| ≥ 2`, `|K_v| = 1`, `|I_v| ≥ 1`, unit objective
    /// coefficients. Such instances always contain cycles.
    Normalized,
    /// A finite tree with the normalized shape except that leaf
    /// constraints have a single agent.
    NormalizedTree,
}

const COEF_MIN: f64 = 0.1;
const COEF_MAX: f64 = 10.0;

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    let raw: f64 = rng.gen_range(COEF_MIN..=COEF_MAX);
    ((raw * 100.0).round() / 100.0).clamp(COEF_MIN, COEF_MAX)
}

/// Deterministic in `seed`; always produces a valid connected instance.
pub fn generate_random(
    agents: usize,
    delta_i: usize,
    delta_k: usize,
    seed: u64,
    kind: GeneratorKind,
) -> Result<Instance> {
    if agents < 2 || delta_i < 2 || delta_k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need agents ≥ 2, delta-i ≥ 2, delta-k ≥ 2 (got {agents}, {delta_i}, {delta_k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (constraints, objectives) = match kind {
        GeneratorKind::General => general(agents, delta_i, delta_k, &mut rng),
        GeneratorKind::Normalized => {
            let groups = objective_groups(agents, delta_k, &mut rng)?;
            (pair_constraints(agents, &groups, &mut rng), groups)
        }
        GeneratorKind::NormalizedTree => {
            let groups = objective_groups(agents, delta_k, &mut rng)?;
            (tree_constraints(agents, &groups, &mut rng), groups)
        }
    };
    let unit_objectives = kind != GeneratorKind::General;
    let inst = assemble(agents, &constraints, &objectives, unit_objectives, &mut rng);
    debug_assert!(super::validate(&inst).is_empty());
    Ok(inst)
}

fn general(
    n: usize,
    delta_i: usize,
    delta_k: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut constraints: Vec<Vec<usize>> = Vec::new();
    let mut objectives: Vec<Vec<usize>> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut placed = vec![order[0]];
    let mut next = 1;
    while next < n {
        let is_constraint = rng.gen_bool(0.5);
        let cap = if is_constraint { delta_i } else { delta_k };
        let size = rng.gen_range(2..=cap);
        let mut members = vec![*placed.choose(rng).unwrap()];
        while members.len() < size && next < n {
            members.push(order[next]);
            next += 1;
        }
        placed.extend_from_slice(&members[1..]);
        if is_constraint {
            constraints.push(members);
        } else {
            objectives.push(members);
        }
    }
    let mut degree = vec![0usize; n];
    for h in constraints.iter().chain(&objectives) {
        for &v in h {
            degree[v] += 1;
        }
    }
    for (is_constraint, count) in [(true, n / 4), (false, n / 4)] {
        let cap = if is_constraint { delta_i } else { delta_k };
        for _ in 0..count {
            let size = rng.gen_range(1..=cap);
            let mut pool: Vec<usize> = (0..n).filter(|&v| degree[v] < 3).collect();
            pool.shuffle(rng);
            pool.truncate(size);
            if pool.is_empty() {
                continue;
            }
            for &v in &pool {
                degree[v] += 1;
            }
            if is_constraint {
                constraints.push(pool);
            } else {
                objectives.push(pool);
            }
        }
    }
    for (list, cap) in [(&mut constraints, delta_i), (&mut objectives, delta_k)] {
        let mut covered = vec![false; n];
        for h in list.iter() {
            for &v in h {
                covered[v] = true;
            }
        }
        for (v, &done) in covered.iter().enumerate() {
            if done {
                continue;
            }
            let open: Vec<usize> = (0..list.len()).filter(|&h| list[h].len() < cap).collect();
            match open.choose(rng) {
                Some(&h) if rng.gen_bool(0.7) => list[h].push(v),
                _ => list.push(vec![v]),
            }
        }
    }
    (constraints, objectives)
}

/// Partitions the agents into objectives of size `2..=delta_k`.
fn objective_groups(n: usize, delta_k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    if delta_k == 2 && n % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "{n} agents cannot be split into objectives of size exactly 2"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut groups = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let size = if rest.len() <= delta_k {
            rest.len()
        } else if delta_k == 2 {
            2
        } else {
            rng.gen_range(2..=delta_k.min(rest.len() - 2))
        };
        let (head, tail) = rest.split_at(size);
        groups.push(head.to_vec());
        rest = tail;
    }
    Ok(groups)
}

fn pair_constraints(n: usize, groups: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let push = |pairs: &mut Vec<(usize, usize)>, a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&key) {
            pairs.push(key);
        }
    };
    for g in 1..groups.len() {
        let a = *groups[g].choose(rng).unwrap();
        let b = *groups[rng.gen_range(0..g)].choose(rng).unwrap();
        push(&mut pairs, a, b);
    }
    for v in 0..n {
        if pairs.iter().any(|&(a, b)| a == v || b == v) {
            continue;
        }
        let mut others: Vec<usize> = (0..n).filter(|&w| w != v).collect();
        others.shuffle(rng);
        for w in others {
            let before = pairs.len();
            push(&mut pairs, v, w);
            if pairs.len() > before {
                break;
            }
        }
    }
    for _ in 0..n / 4 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        push(&mut pairs, a, b);
    }
    pairs.into_iter().map(|(a, b)| vec![a, b]).collect()
}

fn tree_constraints(n: usize, groups: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut constraints = Vec::new();
    for g in 1..groups.len() {
        let a = *groups[g].choose(rng).unwrap();
        let b = *groups[rng.gen_range(0..g)].choose(rng).unwrap();
        constraints.push(vec![a, b]);
    }
    let mut covered = vec![false; n];
    for c in &constraints {
        for &v in c {
            covered[v] = true;
        }
    }
    constraints.extend((0..n).filter(|&v| !covered[v]).map(|v| vec![v]));
    for _ in 0..n / 4 {
        constraints.push(vec![rng.gen_range(0..n)]);
    }
    constraints
}

/// Turns hyperedge lists into edges with random coefficients and a random
/// port permutation at every node.
fn assemble(
    n: usize,
    constraints: &[Vec<usize>],
    objectives: &[Vec<usize>],
    unit_objectives: bool,
    rng: &mut ChaCha8Rng,
) -> Instance {
    let mut ce = Vec::new();
    for (i, members) in constraints.iter().enumerate() {
        for &v in members {
            ce.push(Edge::new(v, i, coefficient(rng), 0, 0));
        }
    }
    let mut oe = Vec::new();
    for (k, members) in objectives.iter().enumerate() {
        for &v in members {
            let c = if unit_objectives {
                1.0
            } else {
                coefficient(rng)
            };
            oe.push(Edge::new(v, k, c, 0, 0));
        }
    }
    let mut at_agent: Vec<Vec<(bool, usize)>> = vec![Vec::new(); n];
    for (j, e) in ce.iter().enumerate() {
        at_agent[e.agent].push((true, j));
    }
    for (j, e) in oe.iter().enumerate() {
        at_agent[e.agent].push((false, j));
    }
    for list in &mut at_agent {
        list.shuffle(rng);
        for (p, &(is_c, j)) in list.iter().enumerate() {
            let port = p as u32 + 1;
            if is_c {
                ce[j].agent_port = port;
            } else {
                oe[j].agent_port = port;
            }
        }
    }
    for (edges, count) in [(&mut ce, constraints.len()), (&mut oe, objectives.len())] {
        let mut at_node: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (j, e) in edges.iter().enumerate() {
            at_node[e.node].push(j);
        }
        for list in &mut at_node {
            list.shuffle(rng);
            for (p, &j) in list.iter().enumerate() {
                edges[j].node_port = p as u32 + 1;
            }
        }
    }
    Instance::new(n, constraints.len(), objectives.len(), ce, oe)
}
