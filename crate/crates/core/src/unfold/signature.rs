//! Interned canonical forms of truncated unfoldings.
//!
//! The view of `node` of depth `h`, entered through edge `via`, is
//! determined by the node kind and, for every other incident edge in port
//! order, the two ports, the coefficient and the child's view of depth
//! `h - 1`. Interning these keys gives equal ids exactly for isomorphic
//! views, without materializing trees whose size grows exponentially with
//! depth.

use std::collections::HashMap;

use crate::instance::{EdgeId, Instance, Node, NodeKind};

type Key = Vec<u64>;

/// Shared interning table. Ids from one signer are comparable across
/// instances.
#[derive(Debug, Default)]
pub struct ViewSigner {
    table: HashMap<Key, u32>,
}

struct Memo<'a> {
    inst: &'a Instance,
    cache: HashMap<(Node, Option<EdgeId>, usize), u32>,
}

impl ViewSigner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id of the depth-`depth` view rooted at `root`.
    pub fn signature(&mut self, inst: &Instance, root: Node, depth: usize) -> u32 {
        self.signatures(inst, &[root], depth)[0]
    }

    /// Ids for several roots of one instance, sharing work between them.
    pub fn signatures(&mut self, inst: &Instance, roots: &[Node], depth: usize) -> Vec<u32> {
        let mut memo = Memo {
            inst,
            cache: HashMap::new(),
        };
        roots
            .iter()
            .map(|&r| self.visit(&mut memo, r, None, depth))
            .collect()
    }

    fn visit(&mut self, memo: &mut Memo<'_>, node: Node, via: Option<EdgeId>, depth: usize) -> u32 {
        if let Some(&id) = memo.cache.get(&(node, via, depth)) {
            return id;
        }
        let inst = memo.inst;
        let mut key: Key = vec![kind_code(node.kind())];
        if depth > 0 {
            for &e in inst.incident(node) {
                if Some(e) == via {
                    continue;
                }
                let child = inst.opposite(e, node);
                let sig = self.visit(memo, child, Some(e), depth - 1);
                key.extend([
                    u64::from(inst.port_at(e, node)),
                    u64::from(inst.port_at(e, child)),
                    inst.edge(e).coef.to_bits(),
                    u64::from(sig),
                ]);
            }
        }
        let next = self.table.len() as u32;
        let id = *self.table.entry(key).or_insert(next);
        memo.cache.insert((node, via, depth), id);
        id
    }
}

fn kind_code(kind: NodeKind) -> u64 {
    match kind {
        NodeKind::Agent => 0,
        NodeKind::Constraint => 1,
        NodeKind::Objective => 2,
    }
}
